//! Ping gaps: spans with no received reply.

use crate::ingest::PingSample;

/// Default nominal ping interval, ms.
pub const DEFAULT_PING_INTERVAL_MS: f64 = 10.0;

/// A span with no reply, from the first missing reply's expected arrival
/// to the next reply actually received.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PingGap {
    pub start: f64,
    pub end: f64,
    /// Sequence number of the reply that closed the gap.
    pub closing_sequence: u64,
}

impl PingGap {
    pub fn duration_s(&self) -> f64 {
        self.end - self.start
    }

    pub fn overlaps(&self, from: f64, to: f64) -> bool {
        self.start < to && self.end > from
    }
}

/// Incremental detector over received replies in arrival order.
#[derive(Debug, Clone)]
pub struct GapDetector {
    nominal_s: f64,
    last: Option<f64>,
    gaps: Vec<PingGap>,
}

impl GapDetector {
    pub fn new(nominal_interval_ms: f64) -> Self {
        assert!(nominal_interval_ms > 0.0, "nominal ping interval must be positive");
        GapDetector { nominal_s: nominal_interval_ms / 1000.0, last: None, gaps: Vec::new() }
    }

    /// Feeds one sample. Lost probes carry no information and are skipped;
    /// replies arriving before the latest one seen are ignored.
    pub fn push(&mut self, s: &PingSample) {
        if s.lost {
            return;
        }
        let t = s.response_timestamp;
        match self.last {
            Some(prev) if t < prev => return,
            Some(prev) => {
                let missing = t - prev - self.nominal_s;
                // small tolerance so a hole of exactly two intervals counts
                if missing >= 2.0 * self.nominal_s - 1e-9 {
                    self.gaps.push(PingGap { start: prev + self.nominal_s, end: t, closing_sequence: s.sequence });
                }
            }
            None => {}
        }
        self.last = Some(t);
    }

    pub fn extend<'a>(&mut self, chunk: impl IntoIterator<Item = &'a PingSample>) {
        for s in chunk {
            self.push(s);
        }
    }

    pub fn gaps(&self) -> &[PingGap] {
        &self.gaps
    }

    pub fn finish(self) -> Vec<PingGap> {
        self.gaps
    }
}

/// All gaps of at least twice the nominal interval. Samples are ordered by
/// arrival time first, so the input order does not matter.
pub fn detect_ping_gaps(samples: &[PingSample], nominal_interval_ms: f64) -> Vec<PingGap> {
    let mut received: Vec<&PingSample> = samples.iter().filter(|s| !s.lost).collect();
    received.sort_by(|a, b| a.response_timestamp.total_cmp(&b.response_timestamp).then(a.sequence.cmp(&b.sequence)));
    let mut det = GapDetector::new(nominal_interval_ms);
    det.extend(received);
    det.finish()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// 10 ms probes from `t0`, with the given sequence numbers lost.
    pub(crate) fn trace(t0: f64, n: u64, lost: impl Fn(u64) -> bool) -> Vec<PingSample> {
        (0..n)
            .map(|k| {
                let sent = t0 + k as f64 * 0.01;
                if lost(k) {
                    PingSample { response_timestamp: sent, sequence: k, rtt_ms: 0.0, lost: true }
                } else {
                    PingSample { response_timestamp: sent + 0.025, sequence: k, rtt_ms: 25.0, lost: false }
                }
            })
            .collect()
    }

    #[test]
    fn continuous_trace_has_no_gap() {
        assert!(detect_ping_gaps(&trace(100.0, 1000, |_| false), 10.0).is_empty());
    }

    #[test]
    fn single_loss_is_below_threshold() {
        assert!(detect_ping_gaps(&trace(100.0, 1000, |k| k == 500), 10.0).is_empty());
    }

    #[test]
    fn two_losses_reach_threshold() {
        assert_eq!(detect_ping_gaps(&trace(100.0, 1000, |k| k == 500 || k == 501), 10.0).len(), 1);
    }

    #[test]
    fn obstruction_sized_hole() {
        // 128 consecutive probes lost: 1.28 s without a reply
        let gaps = detect_ping_gaps(&trace(100.0, 1000, |k| (300..428).contains(&k)), 10.0);
        assert_eq!(gaps.len(), 1);
        assert!((gaps[0].duration_s() - 1.28).abs() < 1e-6, "{:?}", gaps[0]);
        assert!((gaps[0].start - (100.0 + 3.0 + 0.025)).abs() < 1e-6);
        assert_eq!(gaps[0].closing_sequence, 428);
    }

    #[test]
    fn streaming_matches_batch() {
        let samples = trace(100.0, 3000, |k| (300..428).contains(&k) || k % 97 == 0 || (2000..2003).contains(&k));
        let batch = detect_ping_gaps(&samples, 10.0);
        for chunk in [1, 7, 64, 5000] {
            let mut det = GapDetector::new(10.0);
            for c in samples.chunks(chunk) {
                det.extend(c);
            }
            assert_eq!(det.finish(), batch, "chunk {chunk}");
        }
        // idempotent: gaps of the received replies alone are the same
        let received: Vec<_> = samples.iter().filter(|s| !s.lost).cloned().collect();
        assert_eq!(detect_ping_gaps(&received, 10.0), batch);
    }
}
