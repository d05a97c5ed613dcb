/** Pooling strategies over per-token hidden states. */

export type Pooling = 'last-token' | 'first-token' | 'mean';

export const POOLINGS: Pooling[] = ['last-token', 'first-token', 'mean'];

export function parsePooling(raw: string): Pooling {
  if ((POOLINGS as string[]).includes(raw)) {
    return raw as Pooling;
  }
  throw new Error(`unknown pooling '${raw}' (expected one of ${POOLINGS.join(', ')})`);
}

export function pool(states: number[][], strategy: Pooling): number[] {
  if (states.length === 0) {
    throw new Error('cannot pool an empty state sequence');
  }
  switch (strategy) {
    case 'first-token':
      return [...states[0]];
    case 'last-token':
      return [...states[states.length - 1]];
    case 'mean': {
      const dim = states[0].length;
      const out = new Array<number>(dim).fill(0);
      for (const state of states) {
        for (let i = 0; i < dim; i += 1) {
          out[i] += state[i];
        }
      }
      return out.map((v) => v / states.length);
    }
  }
}
