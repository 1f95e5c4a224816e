#include <guadasim/page_analyzer.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace guadasim {

std::string_view to_string(Keyword k) noexcept {
    switch (k) {
    case Keyword::Canvas: return "Canvas";
    case Keyword::Video: return "Video";
    case Keyword::Object: return "Object";
    case Keyword::Embed: return "Embed";
    case Keyword::Animation: return "Animation";
    case Keyword::Transform: return "Transform";
    case Keyword::Perspective: return "Perspective";
    case Keyword::WebGL: return "WebGL";
    }
    return "?";
}

std::string_view to_string(RequirementCategory c) noexcept {
    switch (c) {
    case RequirementCategory::HtmlTag: return "HtmlTag";
    case RequirementCategory::CssProperty: return "CssProperty";
    case RequirementCategory::JsApi: return "JsApi";
    }
    return "?";
}

RequirementCategory category_of(Keyword k) noexcept {
    switch (k) {
    case Keyword::Canvas:
    case Keyword::Video:
    case Keyword::Object:
    case Keyword::Embed: return RequirementCategory::HtmlTag;
    case Keyword::Animation:
    case Keyword::Transform:
    case Keyword::Perspective: return RequirementCategory::CssProperty;
    case Keyword::WebGL: return RequirementCategory::JsApi;
    }
    return RequirementCategory::JsApi;
}

std::string_view to_string(RenderKind k) noexcept {
    return k == RenderKind::TwoD ? "TwoD" : "ThreeD";
}

std::string_view to_string(Mutation::Kind k) noexcept {
    switch (k) {
    case Mutation::Kind::AddElement: return "AddElement";
    case Mutation::Kind::AddCssDeclaration: return "AddCssDeclaration";
    case Mutation::Kind::ScriptCall: return "ScriptCall";
    }
    return "?";
}

Mutation::Kind mutation_kind_from_string(std::string_view name) {
    if (name == "AddElement") return Mutation::Kind::AddElement;
    if (name == "AddCssDeclaration") return Mutation::Kind::AddCssDeclaration;
    if (name == "ScriptCall") return Mutation::Kind::ScriptCall;
    throw InputError(fmt::format("unknown mutation kind '{}'", name));
}

namespace {

std::string lower(std::string_view s) {
    std::string out{s};
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > text.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

std::size_t find_ci(std::string_view text, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
        if (starts_with_ci(text, i, needle)) return i;
    }
    return std::string_view::npos;
}

std::string_view strip_vendor_prefix(std::string_view name) {
    for (std::string_view p : {"-webkit-", "-moz-", "-ms-", "-o-"}) {
        if (name.size() > p.size() && name.substr(0, p.size()) == p) {
            return name.substr(p.size());
        }
    }
    return name;
}

using Emit = std::function<void(Keyword, std::size_t)>;

// CSS: property names at declaration start, plus @keyframes rules. In
// `inline_decls` mode the text is a style attribute body (declarations only).
void scan_css(std::string_view css, bool inline_decls, const Emit& emit) {
    int depth = 0;
    bool at_start = true;
    std::size_t i = 0;
    const std::size_t n = css.size();
    while (i < n) {
        const char c = css[i];
        if (c == '/' && i + 1 < n && css[i + 1] == '*') {
            const std::size_t end = css.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
            continue;
        }
        if (c == '"' || c == '\'') {
            ++i;
            while (i < n && css[i] != c) {
                i += css[i] == '\\' ? 2 : 1;
            }
            ++i;
            at_start = false;
            continue;
        }
        if (c == '{') {
            ++depth;
            at_start = true;
            ++i;
            continue;
        }
        if (c == '}') {
            depth = std::max(0, depth - 1);
            at_start = true;
            ++i;
            continue;
        }
        if (c == ';') {
            at_start = true;
            ++i;
            continue;
        }
        if (c == '@') {
            std::size_t j = i + 1;
            while (j < n && (is_alnum(css[j]) || css[j] == '-' || css[j] == '_')) ++j;
            const std::string rule = lower(css.substr(i + 1, j - i - 1));
            if (strip_vendor_prefix(rule) == "keyframes") {
                emit(Keyword::Animation, i);
            }
            at_start = false;
            i = j;
            continue;
        }
        if (is_space(c)) {
            ++i;
            continue;
        }
        if (at_start && (is_alpha(c) || c == '-' || c == '_')) {
            std::size_t j = i;
            while (j < n && (is_alnum(css[j]) || css[j] == '-' || css[j] == '_')) ++j;
            std::size_t k = j;
            while (k < n && is_space(css[k])) ++k;
            if ((depth > 0 || inline_decls) && k < n && css[k] == ':') {
                if (auto kw = css_property_keyword(css.substr(i, j - i))) {
                    emit(*kw, i);
                }
            }
            at_start = false;
            i = j;
            continue;
        }
        at_start = false;
        ++i;
    }
}

// Scripts: identifiers starting with "WebGL" and getContext("webgl") /
// getContext("experimental-webgl"). Comments and ordinary strings are
// skipped. Regex literals are not recognized.
void scan_script(std::string_view js, const Emit& emit) {
    std::size_t i = 0;
    const std::size_t n = js.size();
    auto skip_string = [&](std::size_t pos) {
        const char q = js[pos];
        std::size_t k = pos + 1;
        while (k < n && js[k] != q) {
            k += js[k] == '\\' ? 2 : 1;
        }
        return std::min(n, k + 1);
    };
    while (i < n) {
        const char c = js[i];
        if (c == '/' && i + 1 < n && js[i + 1] == '/') {
            const std::size_t end = js.find('\n', i);
            i = end == std::string_view::npos ? n : end;
            continue;
        }
        if (c == '/' && i + 1 < n && js[i + 1] == '*') {
            const std::size_t end = js.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
            continue;
        }
        if (c == '"' || c == '\'' || c == '`') {
            i = skip_string(i);
            continue;
        }
        if (is_alpha(c) || c == '_' || c == '$') {
            std::size_t j = i;
            while (j < n && (is_alnum(js[j]) || js[j] == '_' || js[j] == '$')) ++j;
            const std::string ident = lower(js.substr(i, j - i));
            if (ident.starts_with("webgl")) {
                emit(Keyword::WebGL, i);
            } else if (ident == "getcontext") {
                std::size_t k = j;
                while (k < n && is_space(js[k])) ++k;
                if (k < n && js[k] == '(') {
                    ++k;
                    while (k < n && is_space(js[k])) ++k;
                    if (k < n && (js[k] == '"' || js[k] == '\'' || js[k] == '`')) {
                        const std::size_t end = skip_string(k);
                        const std::string arg = lower(js.substr(k + 1, end - k - 2));
                        if (arg == "webgl" || arg == "experimental-webgl") {
                            emit(Keyword::WebGL, k);
                        }
                        j = end;
                    }
                }
            }
            i = j;
            continue;
        }
        ++i;
    }
}

struct Attribute {
    std::string name; // lowercased
    std::string_view value;
    std::size_t value_offset = 0;
};

struct TagVisitor {
    std::function<void(std::string_view name, std::size_t name_offset, const std::vector<Attribute>&)> on_tag;
    std::function<void(std::string_view tag, std::string_view body, std::size_t body_offset,
                       const std::vector<Attribute>&)>
        on_raw_text;
};

// Lexical walk over start tags. Comments, CDATA, end tags and declarations
// are skipped; <script> and <style> bodies are raw text.
void walk_html(std::string_view html, const TagVisitor& visit) {
    std::size_t i = 0;
    const std::size_t n = html.size();
    while (i < n) {
        if (html[i] != '<') {
            ++i;
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            const std::size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (starts_with_ci(html, i, "<![CDATA[")) {
            const std::size_t end = html.find("]]>", i + 9);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (i + 1 >= n || !is_alpha(html[i + 1])) {
            // End tag, doctype, processing instruction or stray '<'.
            if (i + 1 < n && (html[i + 1] == '/' || html[i + 1] == '!' || html[i + 1] == '?')) {
                const std::size_t end = html.find('>', i + 1);
                i = end == std::string_view::npos ? n : end + 1;
            } else {
                ++i;
            }
            continue;
        }

        const std::size_t name_begin = i + 1;
        std::size_t j = name_begin;
        while (j < n && (is_alnum(html[j]) || html[j] == '-' || html[j] == ':')) ++j;
        const std::string name = lower(html.substr(name_begin, j - name_begin));

        std::vector<Attribute> attrs;
        while (j < n && html[j] != '>') {
            if (is_space(html[j]) || html[j] == '/') {
                ++j;
                continue;
            }
            const std::size_t an = j;
            while (j < n && !is_space(html[j]) && html[j] != '=' && html[j] != '>' && html[j] != '/') ++j;
            Attribute attr{lower(html.substr(an, j - an)), {}, j};
            if (j == an) {
                ++j; // lone '=' or similar junk
                continue;
            }
            std::size_t k = j;
            while (k < n && is_space(html[k])) ++k;
            if (k < n && html[k] == '=') {
                ++k;
                while (k < n && is_space(html[k])) ++k;
                if (k < n && (html[k] == '"' || html[k] == '\'')) {
                    const char q = html[k];
                    const std::size_t end = html.find(q, k + 1);
                    const std::size_t stop = end == std::string_view::npos ? n : end;
                    attr.value = html.substr(k + 1, stop - k - 1);
                    attr.value_offset = k + 1;
                    j = std::min(n, stop + 1);
                } else {
                    std::size_t v = k;
                    while (v < n && !is_space(html[v]) && html[v] != '>') ++v;
                    attr.value = html.substr(k, v - k);
                    attr.value_offset = k;
                    j = v;
                }
            }
            attrs.push_back(std::move(attr));
        }
        const std::size_t tag_end = std::min(n, j + 1);
        visit.on_tag(name, name_begin, attrs);

        if (name == "script" || name == "style") {
            const std::size_t close = find_ci(html, fmt::format("</{}", name), tag_end);
            const std::size_t body_end = close == std::string_view::npos ? n : close;
            visit.on_raw_text(name, html.substr(tag_end, body_end - tag_end), tag_end, attrs);
            i = body_end;
        } else {
            i = tag_end;
        }
    }
}

const Attribute* find_attr(const std::vector<Attribute>& attrs, std::string_view name) {
    auto it = std::find_if(attrs.begin(), attrs.end(), [&](const Attribute& a) { return a.name == name; });
    return it == attrs.end() ? nullptr : &*it;
}

void check_unique(const std::vector<NamedText>& items, std::string_view what) {
    std::set<std::string_view> seen;
    for (const auto& item : items) {
        if (!seen.insert(item.name).second) {
            throw InputError(fmt::format("duplicate {} name '{}'", what, item.name));
        }
    }
}

} // namespace

std::optional<Keyword> css_property_keyword(std::string_view property) {
    const std::string lowered = lower(trim(property));
    const std::string_view name = strip_vendor_prefix(lowered);
    auto family = [&](std::string_view base) {
        return name == base || (name.size() > base.size() + 1 && name.substr(0, base.size()) == base &&
                                name[base.size()] == '-');
    };
    if (family("animation")) return Keyword::Animation;
    if (family("transform")) return Keyword::Transform;
    if (family("perspective")) return Keyword::Perspective;
    return std::nullopt;
}

std::optional<Keyword> html_tag_keyword(std::string_view tag) {
    std::string_view t = trim(tag);
    if (!t.empty() && t.front() == '<') t.remove_prefix(1);
    if (!t.empty() && t.back() == '>') t.remove_suffix(1);
    if (!t.empty() && t.back() == '/') t.remove_suffix(1);
    const std::string name = lower(trim(t));
    if (name == "canvas") return Keyword::Canvas;
    if (name == "video") return Keyword::Video;
    if (name == "object") return Keyword::Object;
    if (name == "embed") return Keyword::Embed;
    return std::nullopt;
}

RenderingRequirement analyze(const PageSource& src) {
    if (src.html.empty()) {
        throw InputError(fmt::format("page '{}': HTML source is empty", src.html_name));
    }
    if (src.html.find('\0') != std::string::npos) {
        throw InputError(fmt::format("page '{}': HTML source contains NUL bytes", src.html_name));
    }
    check_unique(src.stylesheets, "stylesheet");
    check_unique(src.scripts, "script");

    RenderingRequirement req;
    auto emitter = [&](const std::string& source, std::size_t base) {
        return [&req, &source, base](Keyword kw, std::size_t offset) {
            req.reasons.push_back(Requirement3D{category_of(kw), kw, SourceLocation{source, base + offset}});
        };
    };

    TagVisitor visitor;
    visitor.on_tag = [&](std::string_view name, std::size_t name_offset, const std::vector<Attribute>& attrs) {
        if (auto kw = html_tag_keyword(name)) {
            req.reasons.push_back(
                Requirement3D{RequirementCategory::HtmlTag, *kw, SourceLocation{src.html_name, name_offset}});
        }
        if (const Attribute* style = find_attr(attrs, "style")) {
            scan_css(style->value, true, emitter(src.html_name, style->value_offset));
        }
    };
    visitor.on_raw_text = [&](std::string_view tag, std::string_view body, std::size_t offset,
                              const std::vector<Attribute>&) {
        if (tag == "style") {
            scan_css(body, false, emitter(src.html_name, offset));
        } else {
            scan_script(body, emitter(src.html_name, offset));
        }
    };
    walk_html(src.html, visitor);

    for (const auto& sheet : src.stylesheets) {
        scan_css(sheet.text, false, emitter(sheet.name, 0));
    }
    for (const auto& script : src.scripts) {
        scan_script(script.text, emitter(script.name, 0));
    }
    return req;
}

RenderingRequirement apply_mutation(RenderingRequirement req, const Mutation& m) {
    if (m.timestamp.count() < 0.0) {
        throw InputError("mutation timestamp must be non-negative");
    }
    const SourceLocation where{fmt::format("mutation@{}ms", m.timestamp.count()), 0};
    auto add = [&](Keyword kw, std::size_t offset) {
        req.reasons.push_back(Requirement3D{category_of(kw), kw, SourceLocation{where.source, offset}});
    };
    switch (m.kind) {
    case Mutation::Kind::AddElement:
        if (auto kw = html_tag_keyword(m.value)) add(*kw, 0);
        break;
    case Mutation::Kind::AddCssDeclaration: {
        std::string_view decl = m.value;
        if (const auto colon = decl.find(':'); colon != std::string_view::npos) {
            decl = decl.substr(0, colon);
        }
        if (auto kw = css_property_keyword(decl)) add(*kw, 0);
        break;
    }
    case Mutation::Kind::ScriptCall: {
        const std::size_t before = req.reasons.size();
        scan_script(m.value, add);
        const std::string api = lower(trim(m.value));
        if (req.reasons.size() == before && (api == "webgl" || api == "experimental-webgl")) {
            add(Keyword::WebGL, 0);
        }
        break;
    }
    }
    return req;
}

CorpusStats corpus_stats(const std::vector<PageSource>& pages) {
    if (pages.empty()) {
        throw InputError("corpus_stats needs at least one page");
    }
    CorpusStats stats;
    for (Keyword k : kAllKeywords) stats.reason_histogram[k] = 0;
    for (const auto& page : pages) {
        const RenderingRequirement req = analyze(page);
        ++stats.total;
        if (req.kind() == RenderKind::ThreeD) {
            ++stats.three_d_count;
        } else {
            ++stats.two_d_count;
        }
        std::set<Keyword> seen;
        for (const auto& r : req.reasons) seen.insert(r.keyword);
        for (Keyword k : seen) ++stats.reason_histogram[k];
    }
    return stats;
}

PageReferences extract_references(std::string_view html) {
    PageReferences refs;
    TagVisitor visitor;
    visitor.on_tag = [&](std::string_view name, std::size_t, const std::vector<Attribute>& attrs) {
        if (name == "link") {
            const Attribute* rel = find_attr(attrs, "rel");
            const Attribute* href = find_attr(attrs, "href");
            if (rel && href && lower(rel->value).find("stylesheet") != std::string::npos && !href->value.empty()) {
                refs.stylesheets.emplace_back(href->value);
            }
        } else if (name == "script") {
            if (const Attribute* s = find_attr(attrs, "src"); s && !s->value.empty()) {
                refs.scripts.emplace_back(s->value);
            }
        }
    };
    visitor.on_raw_text = [](std::string_view, std::string_view, std::size_t, const std::vector<Attribute>&) {};
    walk_html(html, visitor);
    return refs;
}

} // namespace guadasim
