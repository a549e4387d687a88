import { bootstrap } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://localhost:8000";
const root = document.getElementById("app");
if (root) bootstrap(baseUrl, root);
