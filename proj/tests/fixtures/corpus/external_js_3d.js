function toggle(id) {
  var el = document.getElementById(id);
  el.style.display = el.style.display === 'none' ? 'block' : 'none';
}
var ctx = { name: "menu", open: false };
var ctor = WebGLRenderingContext;
