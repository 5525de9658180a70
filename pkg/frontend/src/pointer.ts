/**
 * Pointer capture on a material image: while the finger (or mouse
 * button) is down on the surface, every move event becomes one pointer
 * message at the device's native event rate. Lifting, leaving the
 * surface, or a window blur stops the stream.
 */

export type PointerSender = (tSeconds: number, x: number, y: number) => void;

export function attachPointerCapture(element: HTMLElement, send: PointerSender): () => void {
  let active = false;

  const emit = (event: PointerEvent) => {
    send(event.timeStamp / 1000, event.pageX, event.pageY);
  };

  const onDown = (event: PointerEvent) => {
    active = true;
    element.setPointerCapture(event.pointerId);
    emit(event);
  };
  const onMove = (event: PointerEvent) => {
    if (active) emit(event);
  };
  const stop = () => {
    active = false;
  };
  const onUp = (event: PointerEvent) => {
    if (element.hasPointerCapture(event.pointerId)) {
      element.releasePointerCapture(event.pointerId);
    }
    stop();
  };

  element.addEventListener("pointerdown", onDown);
  element.addEventListener("pointermove", onMove);
  element.addEventListener("pointerup", onUp);
  element.addEventListener("pointerleave", stop);
  element.addEventListener("pointercancel", stop);
  window.addEventListener("blur", stop);

  return () => {
    element.removeEventListener("pointerdown", onDown);
    element.removeEventListener("pointermove", onMove);
    element.removeEventListener("pointerup", onUp);
    element.removeEventListener("pointerleave", stop);
    element.removeEventListener("pointercancel", stop);
    window.removeEventListener("blur", stop);
  };
}
