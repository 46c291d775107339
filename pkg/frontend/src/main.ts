import { ApiClient } from "./api.js";
import { SessionController } from "./state.js";
import { TestView } from "./ui.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const params = new URLSearchParams(window.location.search);
  const listenerId = params.get("listener");
  if (!listenerId) {
    root.textContent = "Open this page as /?listener=<your id>.";
    return;
  }

  const stored = window.sessionStorage.getItem(`session:${listenerId}`) ?? undefined;
  const api = new ApiClient("", fetch.bind(window));
  const controller = new SessionController(api, listenerId, stored);
  try {
    await controller.start();
  } catch (error) {
    root.textContent = String(error);
    return;
  }
  window.sessionStorage.setItem(`session:${listenerId}`, controller.token);
  new TestView(root, controller).render();
}

void boot();
