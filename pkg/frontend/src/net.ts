// Thin websocket wrapper; the ViewModel owns all state.

import type { ClientMsg } from "./protocol.js";

export interface Bridge {
  send(msg: ClientMsg): void;
  close(): void;
}

export function connectBridge(
  url: string,
  onFrame: (raw: string) => void,
  onClose: () => void,
): Bridge {
  const ws = new WebSocket(url);
  ws.onmessage = (ev: MessageEvent) => {
    onFrame(typeof ev.data === "string" ? ev.data : "");
  };
  ws.onclose = onClose;
  ws.onerror = () => {
    // The close handler fires right after; nothing extra to do.
  };
  return {
    send(msg: ClientMsg) {
      if (ws.readyState === WebSocket.OPEN) {
        ws.send(JSON.stringify(msg));
      }
    },
    close() {
      ws.close();
    },
  };
}
