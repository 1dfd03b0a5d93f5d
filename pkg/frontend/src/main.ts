import { BenchApi } from "./api.js";
import { BenchApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const app = new BenchApp(root, new BenchApi(""));
void app.start();
void app.refreshLeaderboard();
