import { ApiClient } from "./api.js";
import { initApp } from "./app.js";

// API base resolution: ?api=... beats <meta name="keyrefine-api">, which
// beats same-origin (the service itself answers /health when it hosts us).
function resolveBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery;
  const meta = document.querySelector<HTMLMetaElement>('meta[name="keyrefine-api"]');
  if (meta?.content) return meta.content;
  if (window.location.protocol.startsWith("http")) return "";
  return "http://127.0.0.1:8008";
}

const root = document.getElementById("app");
if (root) {
  initApp(root, new ApiClient(resolveBase()));
}
