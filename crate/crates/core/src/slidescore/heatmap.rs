use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Per-location running sums of patch positivity contributions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Heatmap {
    // keyed (y, x) so iteration order is row-major
    cells: BTreeMap<(u32, u32), (f64, u64)>,
}

/// One finalized heatmap location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCell {
    pub x: u32,
    pub y: u32,
    pub count: u64,
    pub mean: f64,
}

impl Heatmap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: u32, y: u32, value: f64) {
        let cell = self.cells.entry((y, x)).or_insert((0.0, 0));
        cell.0 += value;
        cell.1 += 1;
    }

    /// Folds `other` into `self`, location by location.
    pub fn merge(&mut self, other: &Heatmap) {
        for (&key, &(sum, count)) in &other.cells {
            let cell = self.cells.entry(key).or_insert((0.0, 0));
            cell.0 += sum;
            cell.1 += count;
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, x: u32, y: u32) -> Option<HeatCell> {
        self.cells.get(&(y, x)).map(|&(sum, count)| HeatCell {
            x,
            y,
            count,
            mean: sum / count as f64,
        })
    }

    /// Mean contribution per location, sorted by `(y, x)`.
    pub fn cells(&self) -> Vec<HeatCell> {
        self.cells
            .iter()
            .map(|(&(y, x), &(sum, count))| HeatCell {
                x,
                y,
                count,
                mean: sum / count as f64,
            })
            .collect()
    }
}
