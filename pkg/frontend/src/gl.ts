// Native WebGL renderer: one textured quad for the image evidence and
// line loops for the reconstructed contours. The selected record is
// drawn bright and wide; unselected records are dimmed.

import { OverlayRenderer, OverlayScene } from "./renderer.js";

const QUAD_VS = `
attribute vec2 a_pos;
uniform vec3 u_view;   // scale, tx, ty (canvas pixels)
uniform vec2 u_canvas;
varying vec2 v_uv;
uniform vec2 u_image;
void main() {
  vec2 px = a_pos * u_image;
  vec2 screen = px * u_view.x + u_view.yz;
  vec2 clip = vec2(screen.x / u_canvas.x * 2.0 - 1.0,
                   1.0 - screen.y / u_canvas.y * 2.0);
  gl_Position = vec4(clip, 0.0, 1.0);
  v_uv = a_pos;
}`;

const QUAD_FS = `
precision mediump float;
varying vec2 v_uv;
uniform sampler2D u_tex;
void main() { gl_FragColor = texture2D(u_tex, v_uv); }`;

const LINE_VS = `
attribute vec2 a_pos;  // image pixels
uniform vec3 u_view;
uniform vec2 u_canvas;
void main() {
  vec2 screen = a_pos * u_view.x + u_view.yz;
  vec2 clip = vec2(screen.x / u_canvas.x * 2.0 - 1.0,
                   1.0 - screen.y / u_canvas.y * 2.0);
  gl_Position = vec4(clip, 0.0, 1.0);
}`;

const LINE_FS = `
precision mediump float;
uniform vec4 u_color;
void main() { gl_FragColor = u_color; }`;

function compile(gl: WebGLRenderingContext, kind: number, src: string): WebGLShader {
  const shader = gl.createShader(kind)!;
  gl.shaderSource(shader, src);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

function program(gl: WebGLRenderingContext, vs: string, fs: string): WebGLProgram {
  const prog = gl.createProgram()!;
  gl.attachShader(prog, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(prog, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(prog);
  if (!gl.getProgramParameter(prog, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(prog)}`);
  }
  return prog;
}

export class WebGlOverlayRenderer implements OverlayRenderer {
  private gl: WebGLRenderingContext;
  private quadProg: WebGLProgram;
  private lineProg: WebGLProgram;
  private quadBuf: WebGLBuffer;
  private lineBuf: WebGLBuffer;
  private texture: WebGLTexture;
  private hasImage = false;
  private imageSize: [number, number] = [1, 1];

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl", { antialias: true });
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    this.quadProg = program(gl, QUAD_VS, QUAD_FS);
    this.lineProg = program(gl, LINE_VS, LINE_FS);
    this.quadBuf = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuf);
    gl.bufferData(gl.ARRAY_BUFFER,
                  new Float32Array([0, 0, 1, 0, 0, 1, 1, 1]), gl.STATIC_DRAW);
    this.lineBuf = gl.createBuffer()!;
    this.texture = gl.createTexture()!;
    gl.bindTexture(gl.TEXTURE_2D, this.texture);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
  }

  setImage(source: TexImageSource | null, width: number, height: number): void {
    const gl = this.gl;
    this.imageSize = [width, height];
    if (!source) {
      this.hasImage = false;
      return;
    }
    gl.bindTexture(gl.TEXTURE_2D, this.texture);
    gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, gl.RGBA, gl.UNSIGNED_BYTE, source);
    this.hasImage = true;
  }

  draw(scene: OverlayScene): void {
    const gl = this.gl;
    const { width, height } = this.canvas;
    gl.viewport(0, 0, width, height);
    gl.clearColor(0.07, 0.08, 0.1, 1.0);
    gl.clear(gl.COLOR_BUFFER_BIT);
    const view = [scene.transform.scale, scene.transform.tx, scene.transform.ty];
    if (this.hasImage) {
      gl.useProgram(this.quadProg);
      gl.uniform3fv(gl.getUniformLocation(this.quadProg, "u_view"), view);
      gl.uniform2f(gl.getUniformLocation(this.quadProg, "u_canvas"), width, height);
      gl.uniform2f(gl.getUniformLocation(this.quadProg, "u_image"),
                   this.imageSize[0], this.imageSize[1]);
      gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuf);
      const loc = gl.getAttribLocation(this.quadProg, "a_pos");
      gl.enableVertexAttribArray(loc);
      gl.vertexAttribPointer(loc, 2, gl.FLOAT, false, 0, 0);
      gl.bindTexture(gl.TEXTURE_2D, this.texture);
      gl.drawArrays(gl.TRIANGLE_STRIP, 0, 4);
    }
    if (!scene.overlayVisible) return;
    gl.useProgram(this.lineProg);
    gl.uniform3fv(gl.getUniformLocation(this.lineProg, "u_view"), view);
    gl.uniform2f(gl.getUniformLocation(this.lineProg, "u_canvas"), width, height);
    const colorLoc = gl.getUniformLocation(this.lineProg, "u_color");
    const posLoc = gl.getAttribLocation(this.lineProg, "a_pos");
    gl.bindBuffer(gl.ARRAY_BUFFER, this.lineBuf);
    gl.enableVertexAttribArray(posLoc);
    gl.vertexAttribPointer(posLoc, 2, gl.FLOAT, false, 0, 0);
    const ordered = [...scene.polygons].sort(
      (a, b) => Number(a.highlighted) - Number(b.highlighted));
    for (const poly of ordered) {
      if (poly.points.length < 2) continue;
      const flat = new Float32Array(poly.points.length * 2);
      poly.points.forEach(([x, y], i) => {
        flat[2 * i] = x;
        flat[2 * i + 1] = y;
      });
      gl.bufferData(gl.ARRAY_BUFFER, flat, gl.DYNAMIC_DRAW);
      gl.uniform4fv(colorLoc, poly.highlighted
        ? [1.0, 0.85, 0.1, 1.0]
        : [0.45, 0.55, 0.65, 0.55]);
      gl.drawArrays(gl.LINE_LOOP, 0, poly.points.length);
    }
  }
}

export function createRenderer(canvas: HTMLCanvasElement): WebGlOverlayRenderer {
  return new WebGlOverlayRenderer(canvas);
}
