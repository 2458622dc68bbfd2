use crate::flash::{ChipId, Geometry};

/// Resource-driven traversal: every channel at chip offset 0, then every
/// channel at offset 1, and so on.
pub fn rios_traverse(g: &Geometry) -> Vec<ChipId> {
    let mut out = Vec::with_capacity(g.total_chips());
    for offset in 0..g.chips_per_channel {
        for channel in 0..g.num_channels {
            out.push(g.chip_id(channel, offset));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_major_order() {
        let g = Geometry { num_channels: 3, chips_per_channel: 3, ..Default::default() };
        let order: Vec<(u32, u32)> = rios_traverse(&g).into_iter().map(|c| g.chip_coords(c)).collect();
        assert_eq!(order[..3], [(0, 0), (1, 0), (2, 0)]);
        assert_eq!(order[3..6], [(0, 1), (1, 1), (2, 1)]);
        assert_eq!(rios_traverse(&g), (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn single_channel_is_index_order() {
        let g = Geometry { num_channels: 1, chips_per_channel: 4, ..Default::default() };
        assert_eq!(rios_traverse(&g), vec![0, 1, 2, 3]);
    }

    #[test]
    fn never_channel_first() {
        let g = Geometry { num_channels: 3, chips_per_channel: 3, ..Default::default() };
        let order = rios_traverse(&g);
        let c3 = g.chip_id(0, 1);
        assert_ne!(order[1], c3);
    }
}
