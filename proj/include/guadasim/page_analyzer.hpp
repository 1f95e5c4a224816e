#pragma once

#include <guadasim/units.hpp>

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace guadasim {

struct NamedText {
    std::string name;
    std::string text;
};

/// Page source as fetched: the HTML document plus whatever external
/// stylesheets and scripts could be resolved.
struct PageSource {
    std::string html_name = "index.html";
    std::string html;
    std::vector<NamedText> stylesheets;
    std::vector<NamedText> scripts;
};

/// Features that only the 3D accelerator can render.
enum class Keyword { Canvas, Video, Object, Embed, Animation, Transform, Perspective, WebGL };

inline constexpr std::array<Keyword, 8> kAllKeywords = {
    Keyword::Canvas,    Keyword::Video,     Keyword::Object,      Keyword::Embed,
    Keyword::Animation, Keyword::Transform, Keyword::Perspective, Keyword::WebGL,
};

[[nodiscard]] std::string_view to_string(Keyword k) noexcept;

enum class RequirementCategory { HtmlTag, CssProperty, JsApi };

[[nodiscard]] std::string_view to_string(RequirementCategory c) noexcept;
[[nodiscard]] RequirementCategory category_of(Keyword k) noexcept;

struct SourceLocation {
    std::string source;
    std::size_t offset = 0;

    friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

struct Requirement3D {
    RequirementCategory category;
    Keyword keyword;
    SourceLocation location;

    friend bool operator==(const Requirement3D&, const Requirement3D&) = default;
};

enum class RenderKind { TwoD, ThreeD };

[[nodiscard]] std::string_view to_string(RenderKind k) noexcept;

/// kind() is ThreeD exactly when reasons is non-empty.
struct RenderingRequirement {
    std::vector<Requirement3D> reasons;

    [[nodiscard]] RenderKind kind() const noexcept { return reasons.empty() ? RenderKind::TwoD : RenderKind::ThreeD; }

    friend bool operator==(const RenderingRequirement&, const RenderingRequirement&) = default;
};

struct Mutation {
    enum class Kind { AddElement, AddCssDeclaration, ScriptCall };

    Millis timestamp{0.0};
    Kind kind = Kind::AddElement;
    std::string value; // tag name, CSS property name or script API text
};

[[nodiscard]] std::string_view to_string(Mutation::Kind k) noexcept;
[[nodiscard]] Mutation::Kind mutation_kind_from_string(std::string_view name);

/// Lexical keyword scan over HTML tags, CSS (sheets, <style> blocks and style
/// attributes) and script text. Comments and CDATA sections are skipped.
/// Reasons come out in document order: the HTML document first (inline
/// styles and scripts at their position), then external sheets, then
/// external scripts. Throws InputError for empty HTML or duplicate names.
[[nodiscard]] RenderingRequirement analyze(const PageSource& src);

/// Incremental re-classification. Only ever adds reasons.
[[nodiscard]] RenderingRequirement apply_mutation(RenderingRequirement req, const Mutation& m);

/// The keyword a single CSS property name implies, after stripping vendor
/// prefixes. Longhands (transform-origin, animation-name, ...) belong to
/// their shorthand's family.
[[nodiscard]] std::optional<Keyword> css_property_keyword(std::string_view property);

/// The keyword an element tag name implies, case-insensitively.
[[nodiscard]] std::optional<Keyword> html_tag_keyword(std::string_view tag);

struct CorpusStats {
    std::size_t total = 0;
    std::size_t two_d_count = 0;
    std::size_t three_d_count = 0;
    /// Number of pages in which each keyword occurs at least once. Every
    /// keyword is present, in canonical order.
    std::map<Keyword, std::size_t> reason_histogram;
};

/// Throws InputError on an empty list.
[[nodiscard]] CorpusStats corpus_stats(const std::vector<PageSource>& pages);

/// External resources an HTML document refers to.
struct PageReferences {
    std::vector<std::string> stylesheets; // <link rel=stylesheet href=...>
    std::vector<std::string> scripts;     // <script src=...>
};

[[nodiscard]] PageReferences extract_references(std::string_view html);

} // namespace guadasim
