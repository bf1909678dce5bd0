import { initApp } from "./app.js";

window.addEventListener("load", () => {
  void initApp(document);
});
