use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geometry::PixelRect;

/// Per-tile splat lists, each sorted front to back.
#[derive(Clone, Debug, PartialEq)]
pub struct TileBinning {
    pub tile_size: usize,
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// `(splat index, center depth)` per tile, ascending by depth then index.
    pub lists: Vec<Vec<(usize, f64)>>,
}

/// Total order used everywhere splats are sorted.
#[inline]
pub(crate) fn depth_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

impl TileBinning {
    /// Bins splats by the tiles their boxes overlap. `items` yields
    /// `(splat index, box, sort depth)` for every splat that survived culling.
    pub fn build<I>(width: usize, height: usize, tile_size: usize, items: I) -> Self
    where
        I: IntoIterator<Item = (usize, PixelRect, f64)>,
    {
        let tiles_x = width.div_ceil(tile_size);
        let tiles_y = height.div_ceil(tile_size);
        let mut lists = vec![Vec::new(); tiles_x * tiles_y];
        for (idx, rect, depth) in items {
            let ty1 = ((rect.y1 - 1) / tile_size).min(tiles_y - 1);
            let tx1 = ((rect.x1 - 1) / tile_size).min(tiles_x - 1);
            for ty in rect.y0 / tile_size..=ty1 {
                for tx in rect.x0 / tile_size..=tx1 {
                    lists[ty * tiles_x + tx].push((idx, depth));
                }
            }
        }
        for l in &mut lists {
            l.sort_by(depth_order);
        }
        Self { tile_size, tiles_x, tiles_y, lists }
    }

    pub fn tile_count(&self) -> usize {
        self.lists.len()
    }

    /// Pixel rectangle of tile `t`, clipped to the image.
    pub fn tile_rect(&self, t: usize, width: usize, height: usize) -> PixelRect {
        let (tx, ty) = (t % self.tiles_x, t / self.tiles_x);
        let x0 = tx * self.tile_size;
        let y0 = ty * self.tile_size;
        PixelRect { x0, y0, x1: (x0 + self.tile_size).min(width), y1: (y0 + self.tile_size).min(height) }
    }
}
