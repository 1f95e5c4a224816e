var t = 'WEBGL';
var c = el.getContext("webgl");
