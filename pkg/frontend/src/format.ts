/** Value formatting. Numbers shown to users come verbatim from ChartSpec
 * payloads; these helpers only change presentation, never the values. */

export function fmtDuration(ms: number): string {
  const totalSec = Math.floor(ms / 1000);
  const h = Math.floor(totalSec / 3600);
  const m = Math.floor((totalSec % 3600) / 60);
  const s = totalSec % 60;
  const mm = String(m).padStart(2, '0');
  const ss = String(s).padStart(2, '0');
  return h > 0 ? `${h}:${mm}:${ss}` : `${m}:${ss}`;
}

export function fmtShare(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function fmtMinutes(minutes: number): string {
  return `${minutes.toFixed(2)} min`;
}

export function fmtBucketTime(bucketIndex: number, bucketMs: number): string {
  const ms = bucketIndex * bucketMs;
  const totalMin = Math.floor(ms / 60_000);
  const h = Math.floor(totalMin / 60);
  const m = totalMin % 60;
  return `${h}:${String(m).padStart(2, '0')}`;
}

export function fmtNumber(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Math.round(v * 1000) / 1000);
}
