//! Bounded knapsack where each item's value equals its size, so the goal is
//! the fullest feasible fill of the capacity.

use crate::error::{Error, Result};

/// Exhaustive enumeration is used up to this many count combinations.
const EXHAUSTIVE_LIMIT: f64 = 1e6;
/// Upper bound on the number of capacity cells in the DP table.
const MAX_CELLS: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItemType {
    pub size: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackInstance {
    capacity: f64,
    item_types: Vec<ItemType>,
    grain: Option<f64>,
}

impl KnapsackInstance {
    pub fn new(capacity: f64, item_types: Vec<ItemType>) -> Result<Self> {
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::InvalidInput(format!("knapsack capacity {capacity}")));
        }
        for t in &item_types {
            if !(t.size.is_finite() && t.size > 0.0) || t.count == 0 {
                return Err(Error::InvalidInput(format!(
                    "knapsack item type needs positive size and count, got {t:?}"
                )));
            }
        }
        Ok(Self {
            capacity,
            item_types,
            grain: None,
        })
    }

    /// Capacity granularity for the DP path; defaults to half the smallest size.
    pub fn with_grain(mut self, grain: f64) -> Result<Self> {
        if !(grain.is_finite() && grain > 0.0) {
            return Err(Error::InvalidInput(format!("knapsack grain {grain}")));
        }
        self.grain = Some(grain);
        Ok(self)
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn item_types(&self) -> &[ItemType] {
        &self.item_types
    }

    fn tol(&self) -> f64 {
        1e-9 * self.capacity.max(1.0)
    }
}

/// Total size of a count vector.
pub fn fill(instance: &KnapsackInstance, counts: &[usize]) -> f64 {
    instance
        .item_types
        .iter()
        .zip(counts)
        .map(|(t, &c)| t.size * c as f64)
        .sum()
}

/// Counts per item type maximizing the fill without exceeding capacity.
pub fn bounded_knapsack(instance: &KnapsackInstance) -> Vec<usize> {
    let types = &instance.item_types;
    if types.is_empty() {
        return Vec::new();
    }
    let combos: f64 = types.iter().map(|t| (t.count + 1) as f64).product();
    if combos <= EXHAUSTIVE_LIMIT {
        exhaustive(instance)
    } else {
        dynamic(instance)
    }
}

fn exhaustive(instance: &KnapsackInstance) -> Vec<usize> {
    let types = &instance.item_types;
    let limit = instance.capacity + instance.tol();
    let mut counts = vec![0usize; types.len()];
    let mut best = counts.clone();
    let mut best_fill = 0.0;
    loop {
        let f = fill(instance, &counts);
        if f <= limit && f > best_fill {
            best_fill = f;
            best.clone_from(&counts);
        }
        // mixed-radix increment
        let mut i = 0;
        loop {
            if i == types.len() {
                return best;
            }
            if counts[i] < types[i].count {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

fn dynamic(instance: &KnapsackInstance) -> Vec<usize> {
    let types = &instance.item_types;
    let min_size = types.iter().map(|t| t.size).fold(f64::INFINITY, f64::min);
    let grain = instance
        .grain
        .unwrap_or(min_size / 2.0)
        .max((instance.capacity + instance.tol()) / MAX_CELLS);
    let cap = ((instance.capacity + instance.tol()) / grain).floor() as usize;

    // binary splitting into 0/1 items: (type, multiplicity, weight)
    let mut items = Vec::new();
    for (i, t) in types.iter().enumerate() {
        let w = (t.size / grain).ceil() as usize;
        let mut left = t.count;
        let mut k = 1;
        while left > 0 {
            let take = k.min(left);
            if w * take <= cap {
                items.push((i, take, w * take));
            }
            left -= take;
            k *= 2;
        }
    }

    // reachable cells as a bitset; `first[c]` is the item that first
    // reached cell c, so walking back through it only meets earlier items
    let words = cap / 64 + 1;
    let mut reach = vec![0u64; words];
    reach[0] = 1;
    let mut first = vec![u32::MAX; cap + 1];
    let mut shifted = vec![0u64; words];
    for (idx, &(_, _, w)) in items.iter().enumerate() {
        let (ws, bs) = (w / 64, w % 64);
        for j in 0..words {
            let lo = if j >= ws { reach[j - ws] << bs } else { 0 };
            let hi = if bs > 0 && j > ws {
                reach[j - ws - 1] >> (64 - bs)
            } else {
                0
            };
            shifted[j] = lo | hi;
        }
        for j in 0..words {
            let mut fresh = shifted[j] & !reach[j];
            reach[j] |= fresh;
            while fresh != 0 {
                let c = j * 64 + fresh.trailing_zeros() as usize;
                if c <= cap {
                    first[c] = idx as u32;
                }
                fresh &= fresh - 1;
            }
        }
    }
    let mut c = cap;
    while reach[c / 64] >> (c % 64) & 1 == 0 {
        c -= 1;
    }
    let mut counts = vec![0usize; types.len()];
    while c > 0 {
        let (t, m, w) = items[first[c] as usize];
        counts[t] += m;
        c -= w;
    }
    counts
}

/// Entries that may each take one of several step sizes (or stay put).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ChoiceGroup {
    pub count: usize,
    pub sizes: Vec<f64>,
}

/// Fullest fill when every group splits its entries among its sizes.
/// Returns per-group, per-size counts, or `None` once the search exceeds
/// `node_limit` nodes.
pub(crate) fn multiple_choice_fill(
    groups: &[ChoiceGroup],
    capacity: f64,
    node_limit: usize,
) -> Option<Vec<Vec<usize>>> {
    struct Search {
        // (group, size, position in the caller's layout), largest first
        options: Vec<(usize, f64, usize)>,
        // most any suffix of `options` could still add
        reach: Vec<f64>,
        limit: f64,
        full: f64,
        left: Vec<usize>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_fill: f64,
        nodes: usize,
        node_limit: usize,
    }

    impl Search {
        /// `Some(true)` once the fill is perfect, `None` past the node limit.
        fn run(&mut self, idx: usize, filled: f64) -> Option<bool> {
            self.nodes += 1;
            if self.nodes > self.node_limit {
                return None;
            }
            if filled > self.best_fill {
                self.best_fill = filled;
                self.best.clone_from(&self.current);
                if filled >= self.full {
                    return Some(true);
                }
            }
            if idx == self.options.len() || filled + self.reach[idx] <= self.best_fill {
                return Some(false);
            }
            let (g, size, _) = self.options[idx];
            let room = ((self.limit - filled) / size).floor().max(0.0) as usize;
            for k in (0..=self.left[g].min(room)).rev() {
                self.current[idx] = k;
                self.left[g] -= k;
                let r = self.run(idx + 1, filled + size * k as f64);
                self.left[g] += k;
                self.current[idx] = 0;
                if r != Some(false) {
                    return r;
                }
            }
            Some(false)
        }
    }

    let mut options: Vec<(usize, f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, grp)| grp.sizes.iter().map(move |&s| (g, s)))
        .enumerate()
        .map(|(pos, (g, s))| (g, s, pos))
        .collect();
    options.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut reach = vec![0.0; options.len() + 1];
    for i in (0..options.len()).rev() {
        let (g, s, _) = options[i];
        reach[i] = reach[i + 1] + s * groups[g].count as f64;
    }
    let tol = 1e-9 * capacity.max(1.0);
    let mut search = Search {
        current: vec![0; options.len()],
        best: vec![0; options.len()],
        options,
        reach,
        limit: capacity + tol,
        full: capacity - tol,
        left: groups.iter().map(|g| g.count).collect(),
        best_fill: 0.0,
        nodes: 0,
        node_limit,
    };
    search.run(0, 0.0)?;
    let mut flat = vec![0; search.options.len()];
    for (&(_, _, pos), &k) in search.options.iter().zip(&search.best) {
        flat[pos] = k;
    }
    let mut it = flat.into_iter();
    Some(
        groups
            .iter()
            .map(|grp| it.by_ref().take(grp.sizes.len()).collect())
            .collect(),
    )
}
