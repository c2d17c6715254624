//! Connected components, two-sided boundaries and Hausdorff distances on
//! classification rasters.
//!
//! Unboundedness of a component is proxied by contact with the window
//! border, so every claim made from these functions is window-relative.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::{Cell, Raster};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::InvalidParameter(format!("connectivity must be 4 or 8, got {n}"))),
        }
    }
}

/// Inclusive pixel bounding box `(i_min, j_min, i_max, j_max)`.
pub type BBox = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: u32,
    pub pixel_count: usize,
    pub bbox: BBox,
    pub touches_border: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSet {
    pub width: usize,
    pub height: usize,
    /// Component id per pixel, 0 outside the labelled set; ids start at 1.
    #[serde(skip)]
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

/// Labels the `true` pixels of a row-major mask. Ids follow the row-major
/// order of each component's first pixel.
pub fn label_mask(mask: &[bool], width: usize, height: usize, connectivity: Connectivity) -> ComponentSet {
    assert_eq!(mask.len(), width * height, "mask length must be width*height");
    let mut labels = vec![0u32; mask.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        let id = components.len() as u32 + 1;
        let (i0, j0) = (start % width, start / width);
        let mut comp = Component { id, pixel_count: 0, bbox: (i0, j0, i0, j0), touches_border: false };
        labels[start] = id;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (i, j) = (p % width, p / width);
            comp.pixel_count += 1;
            comp.bbox = (comp.bbox.0.min(i), comp.bbox.1.min(j), comp.bbox.2.max(i), comp.bbox.3.max(j));
            if i == 0 || j == 0 || i + 1 == width || j + 1 == height {
                comp.touches_border = true;
            }
            for &(di, dj) in connectivity.offsets() {
                let (Some(ni), Some(nj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                    continue;
                };
                if ni >= width || nj >= height {
                    continue;
                }
                let q = nj * width + ni;
                if mask[q] && labels[q] == 0 {
                    labels[q] = id;
                    queue.push_back(q);
                }
            }
        }
        components.push(comp);
    }
    ComponentSet { width, height, labels, components }
}

pub fn mask_of(r: &Raster, cell: Cell) -> Vec<bool> {
    r.cells.iter().map(|&c| c == cell).collect()
}

/// Components of the ESC pixels.
pub fn connected_components(r: &Raster, connectivity: Connectivity) -> ComponentSet {
    label_mask(&mask_of(r, Cell::Esc), r.width, r.height, connectivity)
}

/// Components that do not reach the window border.
pub fn unbounded_proxy(cs: &ComponentSet) -> Vec<Component> {
    cs.components.iter().filter(|c| !c.touches_border).cloned().collect()
}

/// Pixel coordinates `(i, j)`, sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PixelSet(Vec<(usize, usize)>);

impl PixelSet {
    pub fn new(mut pixels: Vec<(usize, usize)>) -> Self {
        pixels.sort_unstable_by_key(|&(i, j)| (j, i));
        pixels.dedup();
        PixelSet(pixels)
    }

    pub fn from_mask(mask: &[bool], width: usize) -> Self {
        PixelSet(mask.iter().enumerate().filter(|(_, &m)| m).map(|(p, _)| (p % width, p / width)).collect())
    }

    pub fn to_mask(&self, width: usize, height: usize) -> Vec<bool> {
        let mut mask = vec![false; width * height];
        for &(i, j) in &self.0 {
            if i < width && j < height {
                mask[j * width + i] = true;
            }
        }
        mask
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: (usize, usize)) -> bool {
        self.0.binary_search_by_key(&(p.1, p.0), |&(i, j)| (j, i)).is_ok()
    }

    /// `i,j` lines in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j\n");
        for (i, j) in &self.0 {
            out.push_str(&format!("{i},{j}\n"));
        }
        out
    }
}

fn four_neighbors(i: usize, j: usize, width: usize, height: usize) -> impl Iterator<Item = (usize, usize)> {
    Connectivity::Four.offsets().iter().filter_map(move |&(di, dj)| {
        let ni = i.checked_add_signed(di)?;
        let nj = j.checked_add_signed(dj)?;
        (ni < width && nj < height).then_some((ni, nj))
    })
}

/// Two-sided pixel boundary of the ESC set: ESC pixels with a BND 4-neighbor
/// and BND pixels with an ESC 4-neighbor. UND pixels belong to neither side.
pub fn boundary(r: &Raster) -> PixelSet {
    let (w, h) = (r.width, r.height);
    let mut out = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let other = match r.get(i, j) {
                Cell::Esc => Cell::Bnd,
                Cell::Bnd => Cell::Esc,
                Cell::Und => continue,
            };
            if four_neighbors(i, j, w, h).any(|(ni, nj)| r.get(ni, nj) == other) {
                out.push((i, j));
            }
        }
    }
    PixelSet(out)
}

/// Adds every 4-neighbor of the mask, clipped to the grid.
pub fn dilate4(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for j in 0..height {
        for i in 0..width {
            if mask[j * width + i] {
                for (ni, nj) in four_neighbors(i, j, width, height) {
                    out[nj * width + ni] = true;
                }
            }
        }
    }
    out
}

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() {
            continue;
        }
        if f[v[k]].is_infinite() {
            v[k] = q;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *o = if f[p].is_infinite() { f64::INFINITY } else { (q as f64 - p as f64).powi(2) + f[p] };
    }
}

/// Exact squared Euclidean distance to the nearest `true` pixel.
pub fn squared_distance_transform(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    let n = width.max(height);
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut column = vec![0f64; height];
    let mut column_out = vec![0f64; height];
    let mut dt: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { f64::INFINITY }).collect();
    for i in 0..width {
        for j in 0..height {
            column[j] = dt[j * width + i];
        }
        edt_1d(&column, &mut column_out, &mut v, &mut z);
        for j in 0..height {
            dt[j * width + i] = column_out[j];
        }
    }
    let mut row_out = vec![0f64; width];
    for j in 0..height {
        let row = &mut dt[j * width..(j + 1) * width];
        edt_1d(row, &mut row_out, &mut v, &mut z);
        row.copy_from_slice(&row_out);
    }
    dt
}

/// Symmetric Hausdorff distance between pixel sets, in pixel units.
pub fn hausdorff_px(a: &PixelSet, b: &PixelSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let all = a.pixels().iter().chain(b.pixels());
    let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
    for &(i, j) in all {
        i0 = i0.min(i);
        j0 = j0.min(j);
        i1 = i1.max(i);
        j1 = j1.max(j);
    }
    let (w, h) = (i1 - i0 + 1, j1 - j0 + 1);
    let shift = |s: &PixelSet| PixelSet(s.pixels().iter().map(|&(i, j)| (i - i0, j - j0)).collect());
    let (a, b) = (shift(a), shift(b));
    let directed = |from: &PixelSet, to: &PixelSet| {
        let dt = squared_distance_transform(&to.to_mask(w, h), w, h);
        from.pixels().iter().map(|&(i, j)| dt[j * w + i]).fold(0.0, f64::max)
    };
    Ok(directed(&a, &b).max(directed(&b, &a)).sqrt())
}
