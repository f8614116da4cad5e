//! The (x, y, heading) sand-trap grid world.
//!
//! Cells are either clear or sand. Sand is traversable: entering it is free,
//! but every forward move that leaves a sand cell costs [`SAND_EXIT_COST`].
//! All other transitions (including turning in place on sand) cost
//! [`UNIT_COST`]. There are no walls.
//!
//! Headings are quarter turns counterclockwise from +x:
//! 0 = East (+x), 1 = North (+y), 2 = West (-x), 3 = South (-y).

use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search::{Cost, SearchDomain};
use crate::splitmix::{splitmix64, unit_f64};

pub const UNIT_COST: Cost = 1;
pub const SAND_EXIT_COST: Cost = 100;

/// Magic prefix of the binary map format.
pub const MAP_MAGIC: [u8; 8] = *b"STMAP\0\0\x01";

/// Rejection-sampling budget of [`generate_instance`].
pub const MAX_INSTANCE_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("map dimensions must be non-zero (got {width}x{height})")]
    ZeroDimension { width: u64, height: u64 },
    #[error("sand density {0} is outside [0, 1]")]
    InvalidDensity(f64),
    #[error("no start/goal pair with separation >= {min_separation} found after {attempts} attempts on a {width}x{height} map")]
    InstanceRejection {
        width: u32,
        height: u32,
        min_separation: u64,
        attempts: u64,
    },
    #[error("not a sand-trap map file (bad magic)")]
    BadMagic,
    #[error("map file is truncated: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("map dimensions {width}x{height} are too large")]
    TooLarge { width: u64, height: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Heading {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn from_index(i: u8) -> Heading {
        Self::ALL[(i & 3) as usize]
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// Quarter turn counterclockwise.
    pub fn left(self) -> Heading {
        Heading::from_index(self.index() + 1)
    }

    /// Quarter turn clockwise.
    pub fn right(self) -> Heading {
        Heading::from_index(self.index() + 3)
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::East => (1, 0),
            Heading::North => (0, 1),
            Heading::West => (-1, 0),
            Heading::South => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridState {
    pub x: u32,
    pub y: u32,
    pub heading: Heading,
}

impl GridState {
    pub fn new(x: u32, y: u32, heading: Heading) -> Self {
        GridState { x, y, heading }
    }

    pub fn cell(&self) -> Cell {
        Cell {
            x: self.x,
            y: self.y,
        }
    }
}

impl fmt::Display for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.heading.index())
    }
}

/// A map cell; goals are cells, reached with any heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(&self, other: &Cell) -> u64 {
        (self.x.abs_diff(other.x) + self.y.abs_diff(other.y)) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub successor: GridState,
    pub cost: Cost,
}

/// Bit-grid of sand cells, row-major (`index = y * width + x`).
#[derive(Clone, PartialEq)]
pub struct SandMap {
    width: u32,
    height: u32,
    density: f64,
    seed: u64,
    bits: Vec<u64>,
}

impl fmt::Debug for SandMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SandMap")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("density", &self.density)
            .field("seed", &self.seed)
            .field("sand_cells", &self.sand_count())
            .finish()
    }
}

impl SandMap {
    /// A map with no sand at all.
    pub fn clear(width: u32, height: u32) -> Result<Self, GridError> {
        check_dims(width as u64, height as u64)?;
        let cells = width as usize * height as usize;
        Ok(SandMap {
            width,
            height,
            density: 0.0,
            seed: 0,
            bits: vec![0; cells.div_ceil(64)],
        })
    }

    /// A map with sand exactly on the listed cells. Mostly for hand-built tests.
    pub fn from_sand_cells(width: u32, height: u32, sand: &[Cell]) -> Result<Self, GridError> {
        let mut map = Self::clear(width, height)?;
        for c in sand {
            assert!(c.x < width && c.y < height, "sand cell {c:?} out of bounds");
            let i = map.index(c.x, c.y);
            map.bits[i / 64] |= 1 << (i % 64);
        }
        map.density = sand.len() as f64 / (width as f64 * height as f64);
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    #[inline]
    pub fn is_sand(&self, x: u32, y: u32) -> bool {
        let i = self.index(x, y);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn sand_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Serializes into the flat binary format: magic, little-endian u64
    /// width, height, seed, f64 density, then `ceil(w*h/8)` bytes of
    /// row-major bits (bit `i` of byte `b` is cell `8b + i`).
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), GridError> {
        out.write_all(&MAP_MAGIC)?;
        out.write_all(&(self.width as u64).to_le_bytes())?;
        out.write_all(&(self.height as u64).to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.density.to_le_bytes())?;
        let nbytes = self.cell_count().div_ceil(8);
        let bytes: Vec<u8> = self
            .bits
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        out.write_all(&bytes)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, GridError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if magic != MAP_MAGIC {
            return Err(GridError::BadMagic);
        }
        let mut word = [0u8; 8];
        let mut next = |input: &mut R| -> Result<[u8; 8], GridError> {
            input.read_exact(&mut word)?;
            Ok(word)
        };
        let width = u64::from_le_bytes(next(&mut input)?);
        let height = u64::from_le_bytes(next(&mut input)?);
        let seed = u64::from_le_bytes(next(&mut input)?);
        let density = f64::from_le_bytes(next(&mut input)?);
        check_dims(width, height)?;
        if width > u32::MAX as u64 || height > u32::MAX as u64 {
            return Err(GridError::TooLarge { width, height });
        }
        let cells = (width * height) as usize;
        let nbytes = cells.div_ceil(8);
        let mut payload = Vec::with_capacity(nbytes);
        input.take(nbytes as u64).read_to_end(&mut payload)?;
        if payload.len() != nbytes {
            return Err(GridError::Truncated {
                expected: nbytes,
                found: payload.len(),
            });
        }
        let mut bits = vec![0u64; cells.div_ceil(64)];
        for (i, b) in payload.iter().enumerate() {
            bits[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        // Padding bits past the last cell are ignored.
        if !cells.is_multiple_of(64) {
            let last = bits.len() - 1;
            bits[last] &= (1u64 << (cells % 64)) - 1;
        }
        Ok(SandMap {
            width: width as u32,
            height: height as u32,
            density,
            seed,
            bits,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), GridError> {
        let file = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self, GridError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(io::BufReader::new(file))
    }
}

fn check_dims(width: u64, height: u64) -> Result<(), GridError> {
    if width == 0 || height == 0 {
        return Err(GridError::ZeroDimension { width, height });
    }
    Ok(())
}

/// Generates a sand map. Cell `i = y * width + x` is sand iff the `i`-th
/// output of the splitmix64 stream seeded with `seed`, mapped to `[0, 1)`,
/// is below `density`.
pub fn generate_map(
    width: u32,
    height: u32,
    density: f64,
    seed: u64,
) -> Result<SandMap, GridError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(GridError::InvalidDensity(density));
    }
    let mut map = SandMap::clear(width, height)?;
    map.density = density;
    map.seed = seed;
    for i in 0..map.cell_count() {
        if unit_f64(splitmix64(seed, i as u64)) < density {
            map.bits[i / 64] |= 1 << (i % 64);
        }
    }
    Ok(map)
}

/// Cost of a legal action pair: [`SAND_EXIT_COST`] for a forward move that
/// leaves a sand cell, [`UNIT_COST`] otherwise.
pub fn transition_cost(from: &GridState, to: &GridState, map: &SandMap) -> Cost {
    if from.cell() != to.cell() && map.is_sand(from.x, from.y) {
        SAND_EXIT_COST
    } else {
        UNIT_COST
    }
}

/// Forward, turn-left and turn-right, in that order. Forward is omitted when
/// it would leave the map.
#[inline]
fn for_each_successor(s: &GridState, map: &SandMap, mut f: impl FnMut(Transition)) {
    let (dx, dy) = s.heading.delta();
    let (nx, ny) = (s.x as i64 + dx, s.y as i64 + dy);
    if map.in_bounds(nx, ny) {
        let next = GridState::new(nx as u32, ny as u32, s.heading);
        f(Transition {
            successor: next,
            cost: transition_cost(s, &next, map),
        });
    }
    for heading in [s.heading.left(), s.heading.right()] {
        let next = GridState::new(s.x, s.y, heading);
        f(Transition {
            successor: next,
            cost: transition_cost(s, &next, map),
        });
    }
}

pub fn successors_into(s: &GridState, map: &SandMap, out: &mut Vec<Transition>) {
    for_each_successor(s, map, |t| out.push(t));
}

pub fn successors(s: &GridState, map: &SandMap) -> Vec<Transition> {
    let mut out = Vec::with_capacity(3);
    successors_into(s, map, &mut out);
    out
}

pub fn at_goal(s: &GridState, goal: &Cell) -> bool {
    s.x == goal.x && s.y == goal.y
}

/// A start/goal pair on a shared map.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub map: Arc<SandMap>,
    pub start: GridState,
    pub goal: Cell,
    pub instance_seed: u64,
}

impl ProblemInstance {
    pub fn new(map: Arc<SandMap>, start: Cell, goal: Cell) -> Self {
        ProblemInstance {
            map,
            start: GridState::new(start.x, start.y, Heading::East),
            goal,
            instance_seed: 0,
        }
    }
}

/// Draws start and goal cells uniformly from the splitmix64 stream seeded
/// with `instance_seed`, rejecting identical cells and pairs closer than
/// `min_separation` (Manhattan). Attempt `a` uses stream outputs `2a` and
/// `2a + 1`. The start faces East.
pub fn generate_instance(
    map: Arc<SandMap>,
    instance_seed: u64,
    min_separation: u64,
) -> Result<ProblemInstance, GridError> {
    let cells = map.cell_count() as u64;
    let width = map.width() as u64;
    let to_cell = |word: u64| {
        let i = word % cells;
        Cell::new((i % width) as u32, (i / width) as u32)
    };
    for attempt in 0..MAX_INSTANCE_ATTEMPTS {
        let start = to_cell(splitmix64(instance_seed, 2 * attempt));
        let goal = to_cell(splitmix64(instance_seed, 2 * attempt + 1));
        if start != goal && start.manhattan(&goal) >= min_separation {
            return Ok(ProblemInstance {
                start: GridState::new(start.x, start.y, Heading::East),
                goal,
                instance_seed,
                map,
            });
        }
    }
    Err(GridError::InstanceRejection {
        width: map.width(),
        height: map.height(),
        min_separation,
        attempts: MAX_INSTANCE_ATTEMPTS,
    })
}

impl SearchDomain for ProblemInstance {
    type State = GridState;

    fn start(&self) -> GridState {
        self.start
    }

    fn is_goal(&self, s: &GridState) -> bool {
        at_goal(s, &self.goal)
    }

    fn expand(&self, s: &GridState, out: &mut Vec<(GridState, Cost)>) {
        for_each_successor(s, &self.map, |t| out.push((t.successor, t.cost)));
    }

    fn step_cost(&self, from: &GridState, to: &GridState) -> Option<Cost> {
        successors(from, &self.map)
            .into_iter()
            .find(|t| t.successor == *to)
            .map(|t| t.cost)
    }
}
