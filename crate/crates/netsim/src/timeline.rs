use std::collections::BTreeMap;

use num_traits::Zero;

use crate::{ratio_f64, Nanos, Rate, NANOS_PER_SEC};

/// Piecewise-constant edge loads. Each edge's breakpoints are sorted by time and a value
/// holds until the next breakpoint or `end`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadTimeline {
    pub per_edge: BTreeMap<usize, Vec<(Nanos, Rate)>>,
    pub end: Nanos,
}

impl LoadTimeline {
    pub fn push(&mut self, edge: usize, at: Nanos, load: Rate) {
        let points = self.per_edge.entry(edge).or_default();
        match points.last_mut() {
            Some(last) if last.0 == at => last.1 = load,
            Some(last) if last.1 == load => {}
            _ => points.push((at, load)),
        }
    }

    pub fn load_at(&self, edge: usize, t: Nanos) -> Rate {
        let Some(points) = self.per_edge.get(&edge) else {
            return Rate::zero();
        };
        match points.partition_point(|p| p.0 <= t) {
            0 => Rate::zero(),
            i => points[i - 1].1,
        }
    }
}

/// ∫ max(0, load − capacity) dt over all edges, in packets.
pub fn fluid_loss(timeline: &LoadTimeline, capacity: Rate, packet_size: u64) -> f64 {
    let mut bits = 0.0;
    for points in timeline.per_edge.values() {
        for (i, &(start, load)) in points.iter().enumerate() {
            let end = points.get(i + 1).map_or(timeline.end, |p| p.0);
            if end > start && load > capacity {
                bits += ratio_f64(&(load - capacity)) * (end - start) as f64 / NANOS_PER_SEC as f64;
            }
        }
    }
    bits / packet_size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbps;

    #[test]
    fn fifteen_on_ten_for_100ms() {
        let mut t = LoadTimeline { end: 100_000_000, ..Default::default() };
        t.push(0, 0, mbps(15));
        assert_eq!(fluid_loss(&t, mbps(10), 10_000), 50.0);
    }

    #[test]
    fn below_capacity_is_lossless() {
        let mut t = LoadTimeline { end: 5 * NANOS_PER_SEC, ..Default::default() };
        t.push(0, 0, mbps(9));
        t.push(1, 0, mbps(10));
        t.push(0, 1_000, mbps(3));
        assert_eq!(fluid_loss(&t, mbps(10), 10_000), 0.0);
    }

    #[test]
    fn disjoint_intervals_add() {
        let mut a = LoadTimeline { end: 1_000_000_000, ..Default::default() };
        a.push(0, 0, mbps(12));
        a.push(0, 10_000_000, mbps(8));
        let mut b = LoadTimeline { end: 1_000_000_000, ..Default::default() };
        b.push(0, 0, mbps(8));
        b.push(0, 500_000_000, mbps(11));
        b.push(0, 530_000_000, mbps(8));
        let mut both = a.clone();
        both.push(0, 500_000_000, mbps(11));
        both.push(0, 530_000_000, mbps(8));
        let sum = fluid_loss(&a, mbps(10), 10_000) + fluid_loss(&b, mbps(10), 10_000);
        assert!((fluid_loss(&both, mbps(10), 10_000) - sum).abs() < 1e-12);
        // 2 Mbps for 10 ms plus 1 Mbps for 30 ms.
        assert!((sum - 5.0).abs() < 1e-12);
    }

    #[test]
    fn load_lookup() {
        let mut t = LoadTimeline::default();
        t.push(2, 10, mbps(1));
        t.push(2, 20, mbps(2));
        assert_eq!(t.load_at(2, 5), Rate::zero());
        assert_eq!(t.load_at(2, 10), mbps(1));
        assert_eq!(t.load_at(2, 25), mbps(2));
    }
}
