import { ApiClient } from "./api";
import { Session } from "./state";
import { el, renderEditor, renderExplanation, renderInstanceList } from "./views";
import "./style.css";

const api = new ApiClient("");
const session = new Session(api);

const app = document.getElementById("app") ?? document.body;

function currentRoute(): string | null {
  const match = window.location.hash.match(/^#\/instance\/(.+)$/);
  return match ? match[1] : null;
}

async function renderBrowserPage() {
  app.textContent = "";
  const shell = el("div", "shell");
  shell.appendChild(el("h1", undefined, "lionex explorer"));
  try {
    const info = await api.modelInfo();
    shell.appendChild(
      el(
        "p",
        "model-line",
        `${info.kind} workspace, ${info.task}, latent width ${info.latent_dim}`,
      ),
    );
    const list = await api.instances(undefined, 100);
    shell.appendChild(
      renderInstanceList(list.instances, (id) => {
        window.location.hash = `#/instance/${id}`;
      }),
    );
  } catch (e) {
    const banner = el("div", "retry-banner");
    banner.appendChild(
      el("p", undefined, `service unreachable: ${e instanceof Error ? e.message : e}`),
    );
    const retry = el("button", "retry", "retry");
    retry.addEventListener("click", () => void renderBrowserPage());
    banner.appendChild(retry);
    shell.appendChild(banner);
  }
  app.appendChild(shell);
}

let detachSession: (() => void) | null = null;

function renderInstancePage(id: string) {
  app.textContent = "";
  const shell = el("div", "shell");
  const back = el("a", "back-link", "< instances");
  back.href = "#/";
  shell.appendChild(back);
  shell.appendChild(el("h1", undefined, id));
  const editorHost = el("div", "editor-host");
  const explanationHost = el("div", "explanation-host");
  shell.appendChild(editorHost);
  shell.appendChild(explanationHost);
  app.appendChild(shell);

  const rerender = () => {
    const snap = session.snapshot();
    editorHost.textContent = "";
    explanationHost.textContent = "";
    if (snap.detail) {
      editorHost.appendChild(renderEditor(session, snap));
    } else if (snap.error) {
      editorHost.appendChild(el("p", "edit-error", snap.error));
    } else {
      editorHost.appendChild(el("p", "loading", "loading..."));
    }
    if (snap.explanation) {
      explanationHost.appendChild(
        renderExplanation(snap.explanation, snap.detail, session.currentWindow(), {
          onAddCounterfactual: (token) => {
            void session.applyEdit({ op: "add_token", token }).catch(() => undefined);
          },
        }),
      );
    }
  };

  detachSession?.();
  detachSession = session.subscribe(rerender);
  rerender();
  void session.select(id).catch(() => undefined);
}

function route() {
  const id = currentRoute();
  if (id) {
    renderInstancePage(id);
  } else {
    detachSession?.();
    detachSession = null;
    void renderBrowserPage();
  }
}

window.addEventListener("hashchange", route);
route();
