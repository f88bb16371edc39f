use super::HarnessError;
use crate::TimestampNs;

/// One anchor record with its nearest partner in every other stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncedTick {
    pub anchor_index: usize,
    pub anchor_ns: TimestampNs,
    /// Index into each secondary stream, in the order given.
    pub partner_indices: Vec<usize>,
    pub partner_ns: Vec<TimestampNs>,
}

impl SyncedTick {
    /// Largest pairwise timestamp difference within the tick.
    pub fn max_skew_ns(&self) -> TimestampNs {
        let all = std::iter::once(self.anchor_ns).chain(self.partner_ns.iter().copied());
        let (lo, hi) = all.fold((TimestampNs::MAX, TimestampNs::MIN), |(lo, hi), t| (lo.min(t), hi.max(t)));
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncResult {
    pub ticks: Vec<SyncedTick>,
    /// Anchor records with no partner within tolerance in some stream.
    pub dropped: usize,
}

pub(crate) fn nearest(stream: &[TimestampNs], t: TimestampNs) -> Option<usize> {
    let i = stream.partition_point(|&s| s < t);
    let before = i.checked_sub(1);
    let after = (i < stream.len()).then_some(i);
    match (before, after) {
        (Some(b), Some(a)) => Some(if t - stream[b] <= stream[a] - t { b } else { a }),
        (b, a) => b.or(a),
    }
}

/// Approximate-time matching anchored on `anchor`: every anchor record takes
/// the nearest record of each other stream and is kept only if all pairwise
/// skews within the tick are at most `tolerance_ns`.
pub fn synchronize(
    anchor: &[TimestampNs],
    others: &[&[TimestampNs]],
    tolerance_ns: TimestampNs,
) -> Result<SyncResult, HarnessError> {
    if anchor.is_empty() {
        return Err(HarnessError::EmptyStream("anchor"));
    }
    let mut ticks = Vec::new();
    let mut dropped = 0;
    'anchor: for (ai, &t) in anchor.iter().enumerate() {
        let mut idx = Vec::with_capacity(others.len());
        let mut ts = Vec::with_capacity(others.len());
        for s in others {
            match nearest(s, t) {
                Some(j) if (s[j] - t).abs() <= tolerance_ns => {
                    idx.push(j);
                    ts.push(s[j]);
                }
                _ => {
                    dropped += 1;
                    continue 'anchor;
                }
            }
        }
        let tick = SyncedTick {
            anchor_index: ai,
            anchor_ns: t,
            partner_indices: idx,
            partner_ns: ts,
        };
        if tick.max_skew_ns() > tolerance_ns {
            dropped += 1;
            continue;
        }
        ticks.push(tick);
    }
    Ok(SyncResult { ticks, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MS: i64 = 1_000_000;

    #[test]
    fn aligned_streams() {
        let a: Vec<i64> = (0..10).map(|k| k * 50 * MS).collect();
        let r = synchronize(&a, &[&a, &a], 5 * MS).unwrap();
        assert_eq!((r.ticks.len(), r.dropped), (10, 0));
    }

    #[test]
    fn threshold_and_sign() {
        let a: Vec<i64> = (0..10).map(|k| k * 50 * MS).collect();
        for sign in [1, -1] {
            let near: Vec<i64> = a.iter().map(|t| t + sign * 4 * MS).collect();
            let far: Vec<i64> = a.iter().map(|t| t + sign * 6 * MS).collect();
            let r = synchronize(&a, &[&near], 5 * MS).unwrap();
            assert_eq!((r.ticks.len(), r.dropped), (10, 0));
            assert!(r.ticks.iter().all(|t| t.max_skew_ns() <= 5 * MS));
            let r = synchronize(&a, &[&far], 5 * MS).unwrap();
            assert_eq!((r.ticks.len(), r.dropped), (0, 10));
        }
    }

    #[test]
    fn partners_on_both_sides_count_pairwise() {
        let r = synchronize(&[100 * MS], &[&[97 * MS], &[103 * MS]], 5 * MS).unwrap();
        assert_eq!(r.dropped, 1);
        let r = synchronize(&[100 * MS], &[&[98 * MS], &[102 * MS]], 5 * MS).unwrap();
        assert_eq!(r.ticks[0].partner_indices, vec![0, 0]);
    }

    #[test]
    fn empty_anchor_is_an_error() {
        assert!(synchronize(&[], &[&[1, 2]], 5).is_err());
    }

    #[test]
    fn empty_partner_drops_everything() {
        let r = synchronize(&[1, 2, 3], &[&[]], 5).unwrap();
        assert_eq!(r.dropped, 3);
    }
}
