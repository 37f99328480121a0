//! Deterministic rasterization of attractors, neighborhoods and zoom frames.
//!
//! This is the only floating-point part of the crate; nothing here feeds back
//! into the exact graph computations.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::exact::{FloatMap, PlanarMap};
use crate::ifs::IfsSpec;
use crate::interior::Neighborhood;
use crate::neighbor::NeighborGraph;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [255, 255, 255];
pub const REFERENCE: Rgb = [150, 150, 150];
pub const OUTLINE: Rgb = [0, 0, 0];
pub const DEFAULT_PALETTE: [Rgb; 8] = [
    [228, 26, 28],
    [55, 126, 184],
    [77, 175, 74],
    [152, 78, 163],
    [255, 127, 0],
    [166, 86, 40],
    [247, 129, 191],
    [23, 190, 207],
];
pub const DEFAULT_MARGIN: f64 = 0.25;

/// Square viewport in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub center: Complex64,
    pub half_width: f64,
    pub pixels: u32,
}

impl Window {
    pub fn new(center: Complex64, half_width: f64, pixels: u32) -> Window {
        assert!(half_width > 0.0, "window half width must be positive");
        assert!(pixels >= 16, "window needs at least 16 pixels");
        Window {
            center,
            half_width,
            pixels,
        }
    }

    /// Window on the attractor's bounding disk with the default margin.
    pub fn around(spec: &IfsSpec, pixels: u32) -> Window {
        let r = spec.attractor_radius().to_f64().unwrap_or(1.0).max(1e-9);
        Window::new(Complex64::new(0.0, 0.0), (1.0 + DEFAULT_MARGIN) * r, pixels)
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.pixels as f64
    }

    /// Pixel containing `z`, with row 0 at the top.
    pub fn to_pixel(&self, z: Complex64) -> Option<(u32, u32)> {
        let x = (z.re - self.center.re + self.half_width) / self.pixel_size();
        let y = (self.center.im + self.half_width - z.im) / self.pixel_size();
        let n = self.pixels as f64;
        if (0.0..n).contains(&x) && (0.0..n).contains(&y) {
            Some((x as u32, y as u32))
        } else {
            None
        }
    }

    pub fn pixel_center(&self, col: u32, row: u32) -> Complex64 {
        let s = self.pixel_size();
        Complex64::new(
            self.center.re - self.half_width + (col as f64 + 0.5) * s,
            self.center.im + self.half_width - (row as f64 + 0.5) * s,
        )
    }

    /// Whether the disk meets the window enlarged by half a pixel.
    fn meets_disk(&self, c: Complex64, radius: f64) -> bool {
        let reach = self.half_width + 0.5 * self.pixel_size() + radius;
        (c.re - self.center.re).abs() <= reach && (c.im - self.center.im).abs() <= reach
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Raster {
        Raster {
            width,
            height,
            data: fill.repeat((width * height) as usize),
        }
    }

    pub fn get(&self, col: u32, row: u32) -> Rgb {
        let i = 3 * (row * self.width + col) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, col: u32, row: u32, c: Rgb) {
        let i = 3 * (row * self.width + col) as usize;
        self.data[i..i + 3].copy_from_slice(&c);
    }

    pub fn count_not(&self, c: Rgb) -> usize {
        self.data.chunks_exact(3).filter(|p| *p != c).count()
    }

    /// Binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Per-pixel layer ids; the highest layer wins, so stamping order does not matter.
struct Layers {
    win: Window,
    ids: Vec<u16>,
}

impl Layers {
    fn new(win: Window) -> Layers {
        Layers {
            win,
            ids: vec![0; (win.pixels * win.pixels) as usize],
        }
    }

    fn stamp(&mut self, z: Complex64, layer: u16) {
        if let Some((c, r)) = self.win.to_pixel(z) {
            let slot = &mut self.ids[(r * self.win.pixels + c) as usize];
            *slot = (*slot).max(layer);
        }
    }

    /// Stamps piece centers of `base(A)` down to sub-pixel size or `max_depth`.
    fn attractor(&mut self, maps: &[FloatMap], radius: f64, base: FloatMap, max_depth: u32, layer: u16) {
        let limit = 0.5 * self.win.pixel_size();
        let mut stack = vec![(base, 0u32)];
        while let Some((f, depth)) = stack.pop() {
            let c = f.apply(Complex64::new(0.0, 0.0));
            let rad = radius * f.ratio();
            if !self.win.meets_disk(c, rad) {
                continue;
            }
            if rad < limit || depth >= max_depth {
                self.stamp(c, layer);
                continue;
            }
            for g in maps {
                stack.push((f.compose(g), depth + 1));
            }
        }
    }

    fn rect_outline(&mut self, lo: Complex64, hi: Complex64, layer: u16) {
        let s = self.win.pixel_size() * 0.5;
        let steps = (((hi.re - lo.re).max(hi.im - lo.im)) / s).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let x = lo.re + t * (hi.re - lo.re);
            let y = lo.im + t * (hi.im - lo.im);
            for z in [
                Complex64::new(x, lo.im),
                Complex64::new(x, hi.im),
                Complex64::new(lo.re, y),
                Complex64::new(hi.re, y),
            ] {
                self.stamp(z, layer);
            }
        }
    }

    fn finish(&self, colors: &[Rgb]) -> Raster {
        let mut r = Raster::new(self.win.pixels, self.win.pixels, BACKGROUND);
        for (i, &id) in self.ids.iter().enumerate() {
            if id > 0 {
                let i = 3 * i;
                r.data[i..i + 3].copy_from_slice(&colors[id as usize - 1]);
            }
        }
        r
    }
}

fn float_maps(spec: &IfsSpec) -> Vec<FloatMap> {
    spec.maps.iter().map(PlanarMap::to_float).collect()
}

fn float_radius(spec: &IfsSpec) -> f64 {
    spec.attractor_radius().to_f64().unwrap_or(0.0)
}

pub fn render_attractor(spec: &IfsSpec, win: Window, max_depth: u32) -> Raster {
    let mut layers = Layers::new(win);
    layers.attractor(&float_maps(spec), float_radius(spec), FloatMap::identity(), max_depth, 1);
    layers.finish(&[OUTLINE])
}

/// Default neighborhood window: centered on the reference piece, half width `(1 + margin)·R`.
pub fn neighborhood_window(g: &NeighborGraph, pixels: u32) -> Window {
    let r = g.radius.to_f64().unwrap_or(1.0).max(1e-9);
    Window::new(Complex64::new(0.0, 0.0), (1.0 + DEFAULT_MARGIN) * r, pixels)
}

fn stamp_neighborhood(layers: &mut Layers, g: &NeighborGraph, nbh: &Neighborhood, max_depth: u32) {
    let maps = float_maps(&g.spec);
    let radius = float_radius(&g.spec);
    layers.attractor(&maps, radius, FloatMap::identity(), max_depth, 1);
    for (n, &v) in nbh.members().iter().enumerate() {
        let h = g.vertices[v as usize].to_float();
        layers.attractor(&maps, radius, h, max_depth, 2 + n as u16);
    }
}

fn neighborhood_colors(count: usize, palette: &[Rgb], extra: &[Rgb]) -> Vec<Rgb> {
    let mut colors = vec![REFERENCE];
    colors.extend((0..count).map(|n| palette[n % palette.len()]));
    colors.extend_from_slice(extra);
    colors
}

/// Reference piece in grey, each neighbor `h(A)` in a palette color.
pub fn render_neighborhood(
    g: &NeighborGraph,
    nbh: &Neighborhood,
    win: Window,
    max_depth: u32,
    palette: &[Rgb],
) -> Raster {
    let mut layers = Layers::new(win);
    stamp_neighborhood(&mut layers, g, nbh, max_depth);
    layers.finish(&neighborhood_colors(nbh.len(), palette, &[]))
}

/// Axis-aligned box `(lo, hi)` in world coordinates.
pub type BoundingBox = (Complex64, Complex64);

/// Sample of attractor points: images of 0 under all words of a fixed length.
pub fn attractor_points(spec: &IfsSpec, max_points: usize) -> Vec<Complex64> {
    let maps = float_maps(spec);
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    // Fixed points of the maps lie in A; starting there keeps extremes sharp.
    pts.extend(maps.iter().map(|f| {
        if f.conj {
            (0..200).fold(Complex64::new(0.0, 0.0), |z, _| f.apply(z))
        } else {
            f.t / (Complex64::new(1.0, 0.0) - f.u)
        }
    }));
    while pts.len() * maps.len() <= max_points {
        pts = pts
            .iter()
            .flat_map(|&z| maps.iter().map(move |f| f.apply(z)))
            .collect();
    }
    pts
}

fn bbox_of(points: impl Iterator<Item = Complex64>) -> BoundingBox {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in points {
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (lo, hi)
}

/// Bounding boxes of the children `f_i(A)` of the reference piece, in label order.
pub fn child_boxes(spec: &IfsSpec) -> Vec<BoundingBox> {
    let pts = attractor_points(spec, 20_000);
    spec.maps
        .iter()
        .map(|f| {
            let f = f.to_float();
            bbox_of(pts.iter().map(|&z| f.apply(z)))
        })
        .collect()
}

/// Current neighborhood view with the child boxes of the reference piece outlined.
pub fn render_zoom_frame(
    g: &NeighborGraph,
    nbh: &Neighborhood,
    win: Window,
    max_depth: u32,
    palette: &[Rgb],
) -> Raster {
    let mut layers = Layers::new(win);
    stamp_neighborhood(&mut layers, g, nbh, max_depth);
    let outline = 2 + nbh.len() as u16;
    for (lo, hi) in child_boxes(&g.spec) {
        layers.rect_outline(lo, hi, outline);
    }
    layers.finish(&neighborhood_colors(nbh.len(), palette, &[OUTLINE]))
}

/// SVG 1.1 document with the bounding boxes of all pieces at `depth`.
pub fn attractor_svg(spec: &IfsSpec, depth: u32, win: Window) -> String {
    let pts = attractor_points(spec, 5_000);
    let maps = float_maps(spec);
    let mut pieces = vec![FloatMap::identity()];
    for _ in 0..depth {
        pieces = pieces
            .iter()
            .flat_map(|f| maps.iter().map(move |g| f.compose(g)))
            .collect();
    }
    let size = win.pixels;
    let scale = size as f64 / (2.0 * win.half_width);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for (n, f) in pieces.iter().enumerate() {
        let (lo, hi) = bbox_of(pts.iter().map(|&z| f.apply(z)));
        let x = (lo.re - win.center.re + win.half_width) * scale;
        let y = (win.center.im + win.half_width - hi.im) * scale;
        let [r, g, b] = DEFAULT_PALETTE[n % DEFAULT_PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"  <rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="rgb({r},{g},{b})"/>"#,
            (hi.re - lo.re) * scale,
            (hi.im - lo.im) * scale
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::presets;
    use crate::interior::{neighborhood_of_word, Word};
    use crate::neighbor::{build_neighbor_graph, NeighborFilter, DEFAULT_CANDIDATE_CAP};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Candidate polygon for the chair: a diamond with one quadrant removed.
    const CHAIR: [(f64, f64); 6] = [(-1.0, 0.0), (0.0, -1.0), (0.5, -0.5), (0.0, 0.0), (0.5, 0.5), (0.0, 1.0)];

    fn inside(poly: &[(f64, f64)], z: Complex64) -> bool {
        let mut hit = false;
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            if (a.1 > z.im) != (b.1 > z.im) && z.re < a.0 + (z.im - a.1) * (b.0 - a.0) / (b.1 - a.1) {
                hit = !hit;
            }
        }
        hit
    }

    #[test]
    fn chair_polygon_is_self_similar() {
        // P = ∪ f_i(P) on a grid off the edges; by uniqueness P is the attractor.
        let spec = presets::load("chair");
        let inverses: Vec<FloatMap> = spec.maps.iter().map(|f| f.invert().to_float()).collect();
        for a in 0..97 {
            for b in 0..97 {
                let z = c(-1.1 + a as f64 * 0.0171, -1.1 + b as f64 * 0.0231);
                let lhs = inside(&CHAIR, z);
                let rhs = inverses.iter().any(|g| inside(&CHAIR, g.apply(z)));
                assert_eq!(lhs, rhs, "{z}");
            }
        }
    }

    #[test]
    fn chair_fills_its_area() {
        let spec = presets::load("chair");
        let shoelace: f64 = (0..CHAIR.len())
            .map(|k| {
                let (a, b) = (CHAIR[k], CHAIR[(k + 1) % CHAIR.len()]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum::<f64>()
            .abs()
            / 2.0;
        assert!((shoelace - 1.5).abs() < 1e-12);
        let win = Window::new(c(-0.25, 0.0), 1.0, 128);
        let lit = render_attractor(&spec, win, 8).count_not(BACKGROUND) as f64;
        let fraction = lit / (128.0 * 128.0);
        let expected = shoelace / 4.0;
        assert!((fraction - expected).abs() < 0.02, "{fraction} vs {expected}");
    }

    #[test]
    fn far_window_is_blank() {
        let spec = presets::load("sierpinski");
        let r = render_attractor(&spec, Window::new(c(100.0, 100.0), 1.0, 64), 12);
        assert_eq!(r.count_not(BACKGROUND), 0);
    }

    #[test]
    fn sierpinski_growth_rate_is_three() {
        let spec = presets::load("sierpinski");
        let win = Window::new(c(0.5, 0.5), 0.6, 512);
        let counts: Vec<f64> = (2..6)
            .map(|d| render_attractor(&spec, win, d).count_not(BACKGROUND) as f64)
            .collect();
        for w in counts.windows(2) {
            assert!((w[1] / w[0] - 3.0).abs() < 0.05, "{counts:?}");
        }
    }

    #[test]
    fn rendering_is_deterministic_and_ppm_is_well_formed() {
        let spec = presets::load("fractal-square");
        let win = Window::around(&spec, 64);
        let a = render_attractor(&spec, win, 10);
        assert_eq!(a, render_attractor(&spec, win, 10));
        let ppm = a.to_ppm();
        assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
        assert_eq!(ppm.len(), 13 + 64 * 64 * 3);
    }

    #[test]
    fn chair_neighbors_surround_the_reference() {
        let g = build_neighbor_graph(&presets::load("chair"), DEFAULT_CANDIDATE_CAP).unwrap();
        let nbh = neighborhood_of_word(&g, NeighborFilter::Continuum, &Word::from("21"));
        let win = Window::new(c(-0.25, 0.0), 1.5, 150);
        let r = render_neighborhood(&g, &nbh, win, 10, &DEFAULT_PALETTE);
        // Tiles leave no holes: every pixel within 0.2 of the reference piece is lit.
        let mut checked = 0;
        for row in 0..150 {
            for col in 0..150 {
                let z = win.pixel_center(col, row);
                let near = (0..16).any(|k| {
                    let d = Complex64::from_polar(0.2, k as f64 * std::f64::consts::PI / 8.0);
                    inside(&CHAIR, z + d)
                });
                if near {
                    checked += 1;
                    assert_ne!(r.get(col, row), BACKGROUND, "hole at {z}");
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn empty_neighborhood_draws_only_the_reference() {
        let g = build_neighbor_graph(&presets::load("chair"), DEFAULT_CANDIDATE_CAP).unwrap();
        let win = neighborhood_window(&g, 64);
        let r = render_neighborhood(&g, &Neighborhood::default(), win, 10, &DEFAULT_PALETTE);
        assert!(r.data.chunks_exact(3).all(|p| p == BACKGROUND || p == REFERENCE));
        assert!(r.count_not(BACKGROUND) > 0);
    }

    #[test]
    fn child_boxes_tile_the_reference_box() {
        let spec = presets::load("square-tile");
        let boxes = child_boxes(&spec);
        assert_eq!(boxes.len(), 4);
        let (lo, hi) = boxes[3];
        assert!((lo - c(0.5, 0.5)).norm() < 1e-9 && (hi - c(1.0, 1.0)).norm() < 1e-3);
    }

    #[test]
    fn svg_has_one_rect_per_piece() {
        let spec = presets::load("sierpinski");
        let svg = attractor_svg(&spec, 2, Window::around(&spec, 200));
        assert_eq!(svg.matches("<rect").count(), 9);
        assert!(svg.starts_with("<svg"));
    }
}
