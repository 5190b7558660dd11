// Browser entry point: real fetch, real WebGL.

import { ApiClient } from "./api.js";
import { createRenderer } from "./gl.js";
import { mount } from "./main.js";

mount(document, {
  api: new ApiClient(""),
  makeRenderer: createRenderer,
});
