// Trailing-edge debounce used for slider scrubbing: at most one call per
// delay window, always ending with the latest arguments.

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  flush(): void;
  dispose(): void;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs = 100,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;

  const fire = () => {
    timer = null;
    if (pending) {
      const args = pending;
      pending = null;
      fn(...args);
    }
  };

  const wrapped = (...args: A) => {
    pending = args;
    if (timer === null) {
      timer = setTimeout(fire, delayMs);
    }
  };
  wrapped.flush = () => {
    if (timer !== null) {
      clearTimeout(timer);
      fire();
    }
  };
  wrapped.dispose = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    pending = null;
  };
  return wrapped;
}
