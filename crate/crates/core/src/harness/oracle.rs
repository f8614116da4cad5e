//! Exact uniform-cost search over the full (x, y, heading) space.
//!
//! Kept independent of the search engine: plain arrays and a binary heap,
//! with transitions spelled out here rather than taken from the domain
//! trait, so it can serve as a reference for everything else.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::HarnessError;
use crate::grid::{Cell, Heading, ProblemInstance, SandMap, SAND_EXIT_COST, UNIT_COST};
use crate::search::Cost;

/// Largest map (in cells) the oracle accepts.
pub const MAX_ORACLE_CELLS: u64 = 1024 * 1024;

pub const UNREACHABLE: Cost = Cost::MAX;

fn check_size(map: &SandMap) -> Result<(), HarnessError> {
    let cells = map.cell_count() as u64;
    if cells > MAX_ORACLE_CELLS {
        return Err(HarnessError::OracleTooLarge {
            cells,
            limit: MAX_ORACLE_CELLS,
        });
    }
    Ok(())
}

#[inline]
fn index(map: &SandMap, x: u32, y: u32, h: u8) -> usize {
    ((y as usize * map.width() as usize + x as usize) << 2) | h as usize
}

#[inline]
fn exit_cost(map: &SandMap, x: u32, y: u32) -> Cost {
    if map.is_sand(x, y) {
        SAND_EXIT_COST
    } else {
        UNIT_COST
    }
}

/// Least cost from the instance's start to any state on the goal cell.
pub fn dijkstra_optimal(instance: &ProblemInstance) -> Result<Cost, HarnessError> {
    let map = &*instance.map;
    check_size(map)?;
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut dist = vec![UNREACHABLE; map.cell_count() * 4];
    let mut heap = BinaryHeap::new();
    let s = instance.start;
    let si = index(map, s.x, s.y, s.heading.index());
    dist[si] = 0;
    heap.push(Reverse((0, si)));
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let heading = (i & 3) as u8;
        let cell = i >> 2;
        let (x, y) = ((cell % w as usize) as u32, (cell / w as usize) as u32);
        if x == instance.goal.x && y == instance.goal.y {
            return Ok(d);
        }
        let mut relax = |j: usize, c: Cost, heap: &mut BinaryHeap<Reverse<(Cost, usize)>>| {
            if d + c < dist[j] {
                dist[j] = d + c;
                heap.push(Reverse((d + c, j)));
            }
        };
        let (dx, dy) = Heading::from_index(heading).delta();
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        if nx >= 0 && ny >= 0 && nx < w && ny < h {
            relax(
                index(map, nx as u32, ny as u32, heading),
                exit_cost(map, x, y),
                &mut heap,
            );
        }
        relax(index(map, x, y, (heading + 1) & 3), UNIT_COST, &mut heap);
        relax(index(map, x, y, (heading + 3) & 3), UNIT_COST, &mut heap);
    }
    Err(HarnessError::Unsolvable)
}

/// Exact cost-to-go to `goal` from every state, by backward uniform-cost
/// search over reversed transitions. Indexed by
/// `(y * width + x) * 4 + heading`.
pub fn cost_to_go(map: &SandMap, goal: Cell) -> Result<Vec<Cost>, HarnessError> {
    check_size(map)?;
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut dist = vec![UNREACHABLE; map.cell_count() * 4];
    let mut heap = BinaryHeap::new();
    for heading in 0..4 {
        let i = index(map, goal.x, goal.y, heading);
        dist[i] = 0;
        heap.push(Reverse((0, i)));
    }
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let heading = (i & 3) as u8;
        let cell = i >> 2;
        let (x, y) = ((cell % w as usize) as u32, (cell / w as usize) as u32);
        let mut relax = |j: usize, c: Cost, heap: &mut BinaryHeap<Reverse<(Cost, usize)>>| {
            if d + c < dist[j] {
                dist[j] = d + c;
                heap.push(Reverse((d + c, j)));
            }
        };
        // Forward move into (x, y) came from the cell behind it.
        let (dx, dy) = Heading::from_index(heading).delta();
        let (px, py) = (x as i64 - dx, y as i64 - dy);
        if px >= 0 && py >= 0 && px < w && py < h {
            let (px, py) = (px as u32, py as u32);
            relax(
                index(map, px, py, heading),
                exit_cost(map, px, py),
                &mut heap,
            );
        }
        // Turning left into `heading` started from heading - 1, right from + 1.
        relax(index(map, x, y, (heading + 3) & 3), UNIT_COST, &mut heap);
        relax(index(map, x, y, (heading + 1) & 3), UNIT_COST, &mut heap);
    }
    Ok(dist)
}

pub fn cost_to_go_at(map: &SandMap, field: &[Cost], x: u32, y: u32, heading: Heading) -> Cost {
    field[index(map, x, y, heading.index())]
}
