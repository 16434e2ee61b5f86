import init, { render_variant, render_pink_noise, mean_spectrum } from "./pkg/primgen_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function paint(canvas, pixels) {
  const n = canvas.width;
  const ctx = canvas.getContext("2d");
  ctx.putImageData(new ImageData(new Uint8ClampedArray(pixels), n, n), 0, 0);
}

function guarded(f) {
  return () => {
    $("error").textContent = "";
    try {
      f();
    } catch (e) {
      $("error").textContent = String(e.message ?? e);
    }
  };
}

const variant = guarded(() => {
  const px = render_variant($("v-variant").value, 256, BigInt(num("v-seed")), num("v-index"), num("v-shapes"));
  paint($("v-canvas"), px);
});

const pink = guarded(() => {
  const a = num("p-a");
  $("p-a-value").textContent = a.toFixed(1);
  paint($("p-canvas"), render_pink_noise(256, a, BigInt(num("p-seed"))));
});

const spectrum = guarded(() => {
  const view = mean_spectrum($("s-variant").value, 128, 0n, 100, num("s-count"));
  paint($("s-canvas"), view.pixels);
  $("s-exponent").textContent = view.exponent.toFixed(3);
  view.free();
});

await init();
$("v-go").addEventListener("click", variant);
$("p-a").addEventListener("input", pink);
$("p-seed").addEventListener("change", pink);
$("s-go").addEventListener("click", spectrum);
variant();
pink();
spectrum();
