//! Frontier detection, clustering and blacklist filtering.
//!
//! A frontier cell is a free cell with at least one unknown 8-neighbor.
//! Cells are clustered into 8-connected components; each cluster is
//! represented by the member cell nearest the arithmetic mean of its
//! members, which keeps the navigation goal on the frontier itself.

use crate::grid::{Cell, CellState, OccupancyGrid};

/// One connected frontier region and its representative cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCluster {
    /// Member frontier cells.
    pub cells: Vec<Cell>,
    /// Member cell nearest the mean of the members.
    pub centroid: Cell,
}

impl FrontierCluster {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

/// Suppressed goal regions: `(center, radius in cells)` entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Blacklist {
    entries: Vec<(Cell, f64)>,
}

impl Blacklist {
    pub fn new() -> Self {
        Blacklist::default()
    }

    pub fn push(&mut self, cell: Cell, radius_cells: f64) {
        assert!(radius_cells >= 0.0, "blacklist radius must be non-negative");
        self.entries.push((cell, radius_cells));
    }

    /// True when `cell` lies within any entry's radius (inclusive).
    pub fn contains(&self, cell: Cell) -> bool {
        self.entries
            .iter()
            .any(|&(c, r)| cell.distance_cells(c) <= r)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const NEIGHBORS_8: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// All frontier cells of the grid, in row-major order.
pub fn detect_frontier_cells(grid: &OccupancyGrid) -> Vec<Cell> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        if grid.state_at(i) != CellState::Free {
            continue;
        }
        let c = grid.cell_at(i);
        let adjacent_unknown = NEIGHBORS_8.iter().any(|&(dx, dy)| {
            let nb = Cell::new(c.x + dx, c.y + dy);
            grid.in_bounds(nb) && grid.state(nb) == CellState::Unknown
        });
        if adjacent_unknown {
            out.push(c);
        }
    }
    out
}

/// Group frontier cells into 8-connected clusters.
///
/// Components smaller than `min_size` are dropped. Clusters are ordered
/// by size descending, then by centroid row-major position, so the
/// output is deterministic for a given grid.
pub fn cluster_frontiers(cells: &[Cell], min_size: usize) -> Vec<FrontierCluster> {
    use std::collections::HashMap;

    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut visited = vec![false; cells.len()];
    let mut clusters = Vec::new();

    for start in 0..cells.len() {
        if visited[start] {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(i) = stack.pop() {
            let c = cells[i];
            members.push(c);
            for &(dx, dy) in &NEIGHBORS_8 {
                let nb = Cell::new(c.x + dx, c.y + dy);
                if let Some(&j) = index.get(&nb) {
                    if !visited[j] {
                        visited[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if members.len() < min_size.max(1) {
            continue;
        }
        members.sort_by_key(|c| c.row_major_key());
        clusters.push(FrontierCluster {
            centroid: centroid_of(&members),
            cells: members,
        });
    }

    clusters.sort_by(|a, b| {
        b.size()
            .cmp(&a.size())
            .then(a.centroid.row_major_key().cmp(&b.centroid.row_major_key()))
    });
    clusters
}

/// Member cell nearest the arithmetic mean; row-major ties.
fn centroid_of(members: &[Cell]) -> Cell {
    let n = members.len() as f64;
    let mx = members.iter().map(|c| c.x as f64).sum::<f64>() / n;
    let my = members.iter().map(|c| c.y as f64).sum::<f64>() / n;
    *members
        .iter()
        .min_by(|a, b| {
            let da = (a.x as f64 - mx).powi(2) + (a.y as f64 - my).powi(2);
            let db = (b.x as f64 - mx).powi(2) + (b.y as f64 - my).powi(2);
            da.partial_cmp(&db)
                .unwrap()
                .then(a.row_major_key().cmp(&b.row_major_key()))
        })
        .expect("cluster is non-empty")
}

/// Drop clusters whose centroid falls inside any blacklist entry.
pub fn filter_blacklist(clusters: Vec<FrontierCluster>, blacklist: &Blacklist) -> Vec<FrontierCluster> {
    clusters
        .into_iter()
        .filter(|cl| !blacklist.contains(cl.centroid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{OccupancyGrid, Pose, UNKNOWN_RAW};

    fn grid_from(rows: &[&str]) -> OccupancyGrid {
        // '.' free, '#' occupied, '?' unknown; rows listed top to bottom
        let h = rows.len();
        let w = rows[0].len();
        let mut g = OccupancyGrid::new_unknown(w, h, 0.1, Pose::new(0.0, 0.0, 0.0));
        for (r, line) in rows.iter().enumerate() {
            for (x, ch) in line.chars().enumerate() {
                let cell = Cell::new(x as i32, (h - 1 - r) as i32);
                let raw = match ch {
                    '.' => 0,
                    '#' => 100,
                    _ => UNKNOWN_RAW,
                };
                g.set_raw(cell, raw);
            }
        }
        g
    }

    #[test]
    fn all_unknown_has_no_frontier() {
        let g = OccupancyGrid::new_unknown(4, 4, 0.1, Pose::new(0.0, 0.0, 0.0));
        assert!(detect_frontier_cells(&g).is_empty());
    }

    #[test]
    fn single_free_cell_among_unknown() {
        let g = grid_from(&["???", "?.?", "???"]);
        assert_eq!(detect_frontier_cells(&g), vec![Cell::new(1, 1)]);
    }

    #[test]
    fn half_split_frontier_is_the_boundary_column() {
        // 20x20, left half free, right half unknown: frontier is exactly
        // the free column adjacent to the unknown half. Brute-force
        // double-loop oracle.
        let mut g = OccupancyGrid::new_unknown(20, 20, 0.1, Pose::new(0.0, 0.0, 0.0));
        for y in 0..20 {
            for x in 0..10 {
                g.set_raw(Cell::new(x, y), 0);
            }
        }
        let got = detect_frontier_cells(&g);

        let mut expected = Vec::new();
        for y in 0..20i32 {
            for x in 0..20i32 {
                let c = Cell::new(x, y);
                if g.state(c) != CellState::Free {
                    continue;
                }
                let mut adj = false;
                for dy in -1..=1i32 {
                    for dx in -1..=1i32 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nb = Cell::new(x + dx, y + dy);
                        if g.in_bounds(nb) && g.state(nb) == CellState::Unknown {
                            adj = true;
                        }
                    }
                }
                if adj {
                    expected.push(c);
                }
            }
        }
        assert_eq!(got, expected);
        assert!(got.iter().all(|c| c.x == 9));
        assert_eq!(got.len(), 20);
    }

    #[test]
    fn two_far_cells_make_two_singletons() {
        let cells = vec![Cell::new(0, 0), Cell::new(10, 10)];
        let clusters = cluster_frontiers(&cells, 1);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].size(), 1);
    }

    #[test]
    fn l_shaped_run_is_one_cluster() {
        let cells = vec![
            Cell::new(0, 0),
            Cell::new(1, 1),
            Cell::new(2, 2),
            Cell::new(3, 2),
            Cell::new(4, 2),
        ];
        let clusters = cluster_frontiers(&cells, 1);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].size(), 5);
    }

    #[test]
    fn min_size_filters_small_clusters() {
        let cells = vec![Cell::new(0, 0), Cell::new(1, 0), Cell::new(5, 5)];
        let clusters = cluster_frontiers(&cells, 3);
        assert!(clusters.is_empty());
        let clusters = cluster_frontiers(&cells, 2);
        assert_eq!(clusters.len(), 1);
    }

    #[test]
    fn cluster_union_equals_detection() {
        let g = grid_from(&["????????", "?......?", "?.####.?", "?.?..#.?", "????????"]);
        let cells = detect_frontier_cells(&g);
        let clusters = cluster_frontiers(&cells, 1);
        let mut union: Vec<Cell> = clusters.iter().flat_map(|c| c.cells.clone()).collect();
        union.sort_by_key(|c| c.row_major_key());
        let mut expected = cells.clone();
        expected.sort_by_key(|c| c.row_major_key());
        assert_eq!(union, expected);
        // centroids are always free cells on the frontier
        for cl in &clusters {
            assert!(cells.contains(&cl.centroid));
        }
    }

    #[test]
    fn determinism_of_cluster_order() {
        let g = grid_from(&["????????", "?..??..?", "????????"]);
        let a = cluster_frontiers(&detect_frontier_cells(&g), 1);
        let b = cluster_frontiers(&detect_frontier_cells(&g), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn blacklist_rules() {
        let clusters = vec![
            FrontierCluster {
                cells: vec![Cell::new(0, 0)],
                centroid: Cell::new(0, 0),
            },
            FrontierCluster {
                cells: vec![Cell::new(5, 0)],
                centroid: Cell::new(5, 0),
            },
        ];

        // empty blacklist is the identity
        let bl = Blacklist::new();
        assert_eq!(filter_blacklist(clusters.clone(), &bl).len(), 2);

        // radius 0 on a centroid removes exactly that cluster
        let mut bl = Blacklist::new();
        bl.push(Cell::new(0, 0), 0.0);
        let left = filter_blacklist(clusters.clone(), &bl);
        assert_eq!(left.len(), 1);
        assert_eq!(left[0].centroid, Cell::new(5, 0));

        // strict containment: distance 5.0 vs radius 4.9 keeps the cluster
        let mut bl = Blacklist::new();
        bl.push(Cell::new(0, 0), 4.9);
        assert_eq!(filter_blacklist(clusters, &bl).len(), 1);
    }
}
