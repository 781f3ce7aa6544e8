/** Browser entry: login, then the annotation page in #app. */

import { ApiClient, ApiError } from "./api.js";
import { SessionModel } from "./model.js";
import { renderLogin, SessionPage, showLoginError } from "./ui.js";

export function boot(root: HTMLElement): void {
  renderLogin(
    root,
    { baseUrl: window.location.origin },
    async ({ baseUrl, token, qaId }) => {
      const client = new ApiClient(baseUrl, token);
      try {
        const model = await SessionModel.open(client, qaId);
        new SessionPage(root, model);
      } catch (err) {
        showLoginError(
          root,
          err instanceof ApiError ? err.message : "cannot reach the service",
        );
      }
    },
  );
}

const root = document.getElementById("app");
if (root !== null) {
  boot(root);
}
