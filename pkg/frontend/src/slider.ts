// Two-thumb range control built from a pair of native range inputs.
// The thumbs clamp against each other on input, so an inverted range is
// impossible by construction.

export interface RangeValue {
  low: number;
  high: number;
}

export class RangeSlider {
  readonly root: HTMLDivElement;
  readonly lowInput: HTMLInputElement;
  readonly highInput: HTMLInputElement;
  private readonly label: HTMLSpanElement;
  private enabled = true;

  constructor(
    readonly feature: string,
    readonly min: number,
    readonly max: number,
    public onChange: (value: RangeValue) => void = () => {},
  ) {
    this.root = document.createElement("div");
    this.root.className = "range-slider";
    this.root.dataset.feature = feature;

    const step = (max - min) / 200 || 1;
    this.lowInput = this.makeInput("low", min, max, step, min);
    this.highInput = this.makeInput("high", min, max, step, max);
    this.label = document.createElement("span");
    this.label.className = "range-label";

    this.root.appendChild(this.lowInput);
    this.root.appendChild(this.highInput);
    this.root.appendChild(this.label);
    this.updateLabel();

    this.lowInput.addEventListener("input", () => this.handleInput("low"));
    this.highInput.addEventListener("input", () => this.handleInput("high"));
  }

  private makeInput(
    name: string,
    min: number,
    max: number,
    step: number,
    value: number,
  ): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "range";
    input.name = name;
    input.min = String(min);
    input.max = String(max);
    input.step = String(step);
    input.value = String(value);
    return input;
  }

  private handleInput(moved: "low" | "high"): void {
    let low = Number(this.lowInput.value);
    let high = Number(this.highInput.value);
    if (low > high) {
      // the moved thumb pushes against the other, never past it
      if (moved === "low") {
        low = high;
        this.lowInput.value = String(low);
      } else {
        high = low;
        this.highInput.value = String(high);
      }
    }
    this.updateLabel();
    this.onChange({ low, high });
  }

  get value(): RangeValue {
    return { low: Number(this.lowInput.value), high: Number(this.highInput.value) };
  }

  setValue(value: RangeValue): void {
    this.lowInput.value = String(Math.min(value.low, value.high));
    this.highInput.value = String(Math.max(value.low, value.high));
    this.updateLabel();
  }

  setEnabled(enabled: boolean): void {
    this.enabled = enabled;
    this.lowInput.disabled = !enabled;
    this.highInput.disabled = !enabled;
    this.root.classList.toggle("disabled", !enabled);
  }

  get isEnabled(): boolean {
    return this.enabled;
  }

  private updateLabel(): void {
    const { low, high } = this.value;
    this.label.textContent = `${low} – ${high}`;
  }
}
