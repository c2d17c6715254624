//! Escape-time classification of single-map orbits and of semigroup orbit
//! trees, plus windowed rasters of the classification.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{ComplexValue, EntireMap};
use crate::words::{Semigroup, Word};

pub const MAX_DEPTH: usize = 12;
pub const MAX_PIXELS: usize = 1 << 24;
pub const DEFAULT_DEPTH: usize = 6;

/// Truncation of "tends to infinity" into a finite computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub max_iter: usize,
    pub r_escape: f64,
    pub r_bound: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_iter: 200, r_escape: 1e50, r_bound: 1e3 }
    }
}

impl Budget {
    pub fn new(max_iter: usize, r_escape: f64, r_bound: f64) -> Result<Self> {
        let b = Budget { max_iter, r_escape, r_bound };
        b.validate()?;
        Ok(b)
    }

    pub fn with_max_iter(self, max_iter: usize) -> Self {
        Budget { max_iter, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if !(self.r_bound > 0.0 && self.r_bound < self.r_escape) {
            return Err(Error::InvalidParameter("need 0 < r_bound < r_escape".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitStatus {
    Escaped { step: usize },
    Bounded { max_modulus: f64 },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    #[serde(flatten)]
    pub status: OrbitStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<f64>>,
}

impl OrbitRecord {
    pub fn escaped(&self) -> bool {
        matches!(self.status, OrbitStatus::Escaped { .. })
    }

    pub fn bounded(&self) -> bool {
        matches!(self.status, OrbitStatus::Bounded { .. })
    }
}

/// Runs `step` from `z` (already at iteration `start`) through `max_iter`.
fn run_orbit(
    mut z: ComplexValue,
    start: usize,
    mut max_modulus: f64,
    b: &Budget,
    mut trace: Option<&mut Vec<f64>>,
    step: impl Fn(ComplexValue) -> ComplexValue,
) -> OrbitStatus {
    for n in start..b.max_iter {
        z = step(z);
        let m = z.modulus();
        if let Some(t) = trace.as_deref_mut() {
            t.push(m);
        }
        if m >= b.r_escape {
            return OrbitStatus::Escaped { step: n + 1 };
        }
        max_modulus = max_modulus.max(m);
    }
    if max_modulus <= b.r_bound {
        OrbitStatus::Bounded { max_modulus }
    } else {
        OrbitStatus::Undetermined
    }
}

fn classify(f: &EntireMap, z: ComplexValue, b: &Budget, traced: bool) -> OrbitRecord {
    let m0 = z.modulus();
    let mut trace = traced.then(|| vec![m0]);
    let status = if m0 >= b.r_escape {
        OrbitStatus::Escaped { step: 0 }
    } else {
        run_orbit(z, 0, m0, b, trace.as_mut(), |w| f.eval(w))
    };
    OrbitRecord { status, trace }
}

/// Escaped at the first step reaching `r_escape` (or overflow), Bounded when
/// every modulus through `max_iter` stays within `r_bound`.
pub fn classify_orbit(f: &EntireMap, z: ComplexValue, b: &Budget) -> OrbitRecord {
    classify(f, z, b, false)
}

/// Same as [`classify_orbit`], keeping the modulus of every visited point.
pub fn classify_orbit_traced(f: &EntireMap, z: ComplexValue, b: &Budget) -> OrbitRecord {
    classify(f, z, b, true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum BranchStatus {
    AllBranchesEscape,
    SomeBranchBounded(Word),
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigroupClass {
    pub status: BranchStatus,
    /// Latest escape step over all branches, when every branch escaped.
    pub escape_step: Option<usize>,
}

struct Explorer<'a> {
    gens: &'a [EntireMap],
    budget: &'a Budget,
    depth: usize,
    word: Vec<usize>,
    undetermined: bool,
    latest_escape: usize,
}

impl Explorer<'_> {
    /// Returns true once a bounded witness sits in `self.word`.
    fn explore(&mut self, z: ComplexValue, max_modulus: f64) -> bool {
        let b = self.budget;
        let step = self.word.len();
        if z.modulus() >= b.r_escape {
            self.latest_escape = self.latest_escape.max(step);
            return false;
        }
        // Verdict is already not "all escape"; only a bounded witness matters now.
        if self.undetermined && max_modulus > b.r_bound {
            return false;
        }
        if step == self.depth {
            let last = &self.gens[self.word[step - 1]];
            return match run_orbit(z, step, max_modulus, b, None, |w| last.eval(w)) {
                OrbitStatus::Escaped { step } => {
                    self.latest_escape = self.latest_escape.max(step);
                    false
                }
                OrbitStatus::Bounded { .. } => true,
                OrbitStatus::Undetermined => {
                    self.undetermined = true;
                    false
                }
            };
        }
        for (i, g) in self.gens.iter().enumerate() {
            let child = g.eval(z);
            self.word.push(i);
            if self.explore(child, max_modulus.max(child.modulus())) {
                return true;
            }
            self.word.pop();
        }
        false
    }
}

/// All-branch classification over the semigroup's orbit tree.
///
/// The first `depth` steps branch over every generator; each leaf then keeps
/// applying its last generator until `max_iter` total steps. A branch is
/// treated as escaped as soon as its modulus reaches `r_escape`.
pub fn classify_branches(g: &Semigroup, z: ComplexValue, depth: usize, b: &Budget) -> Result<SemigroupClass> {
    if depth > MAX_DEPTH {
        return Err(Error::LimitExceeded { what: "depth", got: depth, limit: MAX_DEPTH });
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }
    let mut ex = Explorer {
        gens: g.generators(),
        budget: b,
        depth: depth.min(b.max_iter),
        word: Vec::with_capacity(depth),
        undetermined: false,
        latest_escape: 0,
    };
    let status = if ex.explore(z, z.modulus()) {
        BranchStatus::SomeBranchBounded(Word(ex.word))
    } else if ex.undetermined {
        BranchStatus::Undetermined
    } else {
        BranchStatus::AllBranchesEscape
    };
    let escape_step = matches!(status, BranchStatus::AllBranchesEscape).then_some(ex.latest_escape);
    Ok(SemigroupClass { status, escape_step })
}

/// Rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl TryFrom<[f64; 4]> for Window {
    type Error = Error;
    fn try_from([a, b, c, d]: [f64; 4]) -> Result<Self> {
        Window::new(a, b, c, d)
    }
}

impl From<Window> for [f64; 4] {
    fn from(w: Window) -> Self {
        [w.re_min, w.re_max, w.im_min, w.im_max]
    }
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(Error::InvalidParameter(format!("bad window [{re_min}, {re_max}] x [{im_min}, {im_max}]")));
        }
        Ok(Window { re_min, re_max, im_min, im_max })
    }

    pub fn square(half: f64) -> Self {
        Window { re_min: -half, re_max: half, im_min: -half, im_max: half }
    }

    /// Center of pixel `(i, j)`; row 0 is the top edge (`im_max`).
    pub fn pixel_center(&self, i: usize, j: usize, width: usize, height: usize) -> Complex64 {
        let dx = (self.re_max - self.re_min) / width as f64;
        let dy = (self.im_max - self.im_min) / height as f64;
        Complex64::new(self.re_min + (i as f64 + 0.5) * dx, self.im_max - (j as f64 + 0.5) * dy)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Esc,
    Bnd,
    Und,
}

impl Cell {
    pub fn code(self) -> char {
        match self {
            Cell::Esc => 'E',
            Cell::Bnd => 'B',
            Cell::Und => 'U',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'E' => Some(Cell::Esc),
            'B' => Some(Cell::Bnd),
            'U' => Some(Cell::Und),
            _ => None,
        }
    }
}

impl From<&OrbitRecord> for Cell {
    fn from(r: &OrbitRecord) -> Self {
        match r.status {
            OrbitStatus::Escaped { .. } => Cell::Esc,
            OrbitStatus::Bounded { .. } => Cell::Bnd,
            OrbitStatus::Undetermined => Cell::Und,
        }
    }
}

impl From<&SemigroupClass> for Cell {
    fn from(r: &SemigroupClass) -> Self {
        match r.status {
            BranchStatus::AllBranchesEscape => Cell::Esc,
            BranchStatus::SomeBranchBounded(_) => Cell::Bnd,
            BranchStatus::Undetermined => Cell::Und,
        }
    }
}

/// Grid of per-pixel classifications over a window, row-major from the top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RasterRepr", into = "RasterRepr")]
pub struct Raster {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
    /// Escape step per ESC cell (0 elsewhere); not serialized.
    pub steps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RasterRepr {
    window: Window,
    w: usize,
    h: usize,
    cells: String,
}

impl TryFrom<RasterRepr> for Raster {
    type Error = Error;
    fn try_from(r: RasterRepr) -> Result<Self> {
        let cells = decode_cells(&r.cells)?;
        if cells.len() != r.w * r.h {
            return Err(Error::InvalidParameter(format!("{} cells for a {}x{} raster", cells.len(), r.w, r.h)));
        }
        Ok(Raster { window: r.window, width: r.w, height: r.h, steps: vec![0; cells.len()], cells })
    }
}

impl From<Raster> for RasterRepr {
    fn from(r: Raster) -> Self {
        RasterRepr { window: r.window, w: r.width, h: r.height, cells: encode_cells(&r.cells) }
    }
}

/// Run-length encoding: `<count><code>` repeated, e.g. `"12E3B1U"`.
pub fn encode_cells(cells: &[Cell]) -> String {
    let mut out = String::new();
    let mut iter = cells.iter().peekable();
    while let Some(&cell) = iter.next() {
        let mut run = 1;
        while iter.next_if(|&&c| c == cell).is_some() {
            run += 1;
        }
        out.push_str(&run.to_string());
        out.push(cell.code());
    }
    out
}

pub fn decode_cells(s: &str) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    let mut count = String::new();
    for ch in s.chars() {
        if ch.is_ascii_digit() {
            count.push(ch);
            continue;
        }
        let cell = Cell::from_code(ch).ok_or_else(|| Error::InvalidParameter(format!("bad cell code {ch:?}")))?;
        let run: usize = count.parse().map_err(|_| Error::InvalidParameter("cell run without a count".into()))?;
        cells.extend(std::iter::repeat_n(cell, run));
        count.clear();
    }
    if !count.is_empty() {
        return Err(Error::InvalidParameter("trailing count in cell string".into()));
    }
    Ok(cells)
}

impl Raster {
    pub fn new(window: Window, width: usize, height: usize, cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::InvalidParameter("cells length must be width*height".into()));
        }
        Ok(Raster { window, width, height, steps: vec![0; cells.len()], cells })
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.width + i]
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == cell).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// What a raster classifies: a single map's orbits or a semigroup's orbit tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Map(EntireMap),
    Semigroup(Semigroup),
}

impl Subject {
    /// Cell and escape step at one point.
    pub fn classify_point(&self, z: Complex64, depth: usize, b: &Budget) -> Result<(Cell, u32)> {
        let z = ComplexValue::from_complex(z);
        Ok(match self {
            Subject::Map(f) => {
                let r = classify_orbit(f, z, b);
                let step = match r.status {
                    OrbitStatus::Escaped { step } => step as u32,
                    _ => 0,
                };
                (Cell::from(&r), step)
            }
            Subject::Semigroup(g) => {
                let r = classify_branches(g, z, depth, b)?;
                (Cell::from(&r), r.escape_step.unwrap_or(0) as u32)
            }
        })
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serde_json::to_string(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => f.write_str("<subject>"),
        }
    }
}

/// Classifies every pixel center; rows are computed in parallel.
pub fn compute_grid(subject: &Subject, window: Window, width: usize, height: usize, depth: usize, b: &Budget) -> Result<Raster> {
    let pixels = width.saturating_mul(height);
    if pixels > MAX_PIXELS {
        return Err(Error::LimitExceeded { what: "pixels", got: pixels, limit: MAX_PIXELS });
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("raster needs at least one pixel".into()));
    }
    if depth > MAX_DEPTH {
        return Err(Error::LimitExceeded { what: "depth", got: depth, limit: MAX_DEPTH });
    }
    b.validate()?;
    let rows: Vec<Vec<(Cell, u32)>> = (0..height)
        .into_par_iter()
        .map(|j| (0..width).map(|i| subject.classify_point(window.pixel_center(i, j, width, height), depth, b)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let (cells, steps) = rows.into_iter().flatten().unzip();
    Ok(Raster { window, width, height, cells, steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceViolation {
    pub sample: usize,
    pub generator: usize,
    pub witness: Word,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub checked: usize,
    pub violations: Vec<InvarianceViolation>,
}

/// For samples classified as escaping, checks that no generator image has a
/// bounded branch.
pub fn forward_invariance_check(g: &Semigroup, samples: &[ComplexValue], depth: usize, b: &Budget) -> Result<InvarianceReport> {
    let per_sample: Vec<Vec<InvarianceViolation>> = samples
        .par_iter()
        .enumerate()
        .map(|(sample, &z)| {
            let mut found = Vec::new();
            for (generator, gen) in g.generators().iter().enumerate() {
                if let BranchStatus::SomeBranchBounded(witness) = classify_branches(g, gen.eval(z), depth, b)?.status {
                    found.push(InvarianceViolation { sample, generator, witness });
                }
            }
            Ok(found)
        })
        .collect::<Result<_>>()?;
    Ok(InvarianceReport { checked: samples.len(), violations: per_sample.into_iter().flatten().collect() })
}
