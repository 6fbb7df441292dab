import { mount } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8075";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app root element");

const player = mount({ baseUrl, root });
const sessionId = params.get("session");
const scriptId = params.get("script");
if (sessionId) {
  void player.attach(sessionId);
} else if (scriptId) {
  void player.startSessionFromScript(scriptId, params.get("arch") ?? "hybrid");
}
