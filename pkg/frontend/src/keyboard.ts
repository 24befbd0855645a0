/** Keyboard shortcuts for review throughput. */

export interface ShortcutHandlers {
  stepFrame: (delta: number) => void;
  accept: () => void;
  reject: () => void;
  submit: () => void;
  split: () => void;
  reset: () => void;
}

export function bindShortcuts(target: EventTarget, handlers: ShortcutHandlers): () => void {
  const onKeyDown = (event: Event) => {
    const key = (event as KeyboardEvent).key;
    const element = event.target as HTMLElement | null;
    if (element && (element.tagName === 'INPUT' || element.tagName === 'TEXTAREA')) {
      return; // don't steal keys from the note field
    }
    switch (key) {
      case 'ArrowLeft':
        event.preventDefault();
        handlers.stepFrame(-1);
        break;
      case 'ArrowRight':
        event.preventDefault();
        handlers.stepFrame(1);
        break;
      case 'a':
      case 'A':
        event.preventDefault();
        handlers.accept();
        break;
      case 'r':
      case 'R':
        event.preventDefault();
        handlers.reject();
        break;
      case 's':
      case 'S':
        event.preventDefault();
        handlers.split();
        break;
      case 'u':
      case 'U':
        event.preventDefault();
        handlers.reset();
        break;
      case 'Enter':
        event.preventDefault();
        handlers.submit();
        break;
    }
  };
  target.addEventListener('keydown', onKeyDown);
  return () => target.removeEventListener('keydown', onKeyDown);
}
