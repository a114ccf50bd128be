//! Minimal raster line plots: two panels (relative error, SSIM) against the
//! iteration count, one colored polyline per run. No text is drawn; the
//! legend order matches the CSV written next to the plot.

use image::{Rgb, RgbImage};
use mlrecon_core::solver::ConvergenceLog;

const W: u32 = 960;
const H: u32 = 420;
const MARGIN: u32 = 30;
const PALETTE: [[u8; 3]; 6] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [23, 190, 207],
];

struct Panel {
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
}

impl Panel {
    fn to_px(&self, fx: f64, fy: f64) -> (i64, i64) {
        let x = self.x0 as f64 + fx.clamp(0.0, 1.0) * (self.w - 1) as f64;
        let y = (self.y0 + self.h - 1) as f64 - fy.clamp(0.0, 1.0) * (self.h - 1) as f64;
        (x.round() as i64, y.round() as i64)
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        put(img, x0, y0, c);
        put(img, x0, y0 + 1, c);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn frame(img: &mut RgbImage, p: &Panel) {
    let grid = Rgb([225, 225, 225]);
    for k in 1..5 {
        let f = k as f64 / 5.0;
        line(img, p.to_px(0.0, f), p.to_px(1.0, f), grid);
        line(img, p.to_px(f, 0.0), p.to_px(f, 1.0), grid);
    }
    let black = Rgb([0, 0, 0]);
    for (a, b) in [((0.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (1.0, 1.0)), ((1.0, 1.0), (0.0, 1.0)), ((0.0, 1.0), (0.0, 0.0))] {
        line(img, p.to_px(a.0, a.1), p.to_px(b.0, b.1), black);
    }
}

fn series(img: &mut RgbImage, p: &Panel, pts: &[(f64, f64)], (lo, hi): (f64, f64), max_iter: f64, c: Rgb<u8>) {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let px: Vec<_> = pts.iter().map(|&(x, y)| p.to_px(x / max_iter, (y - lo) / span)).collect();
    for w in px.windows(2) {
        line(img, w[0], w[1], c);
    }
    if let [only] = px[..] {
        put(img, only.0, only.1, c);
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() { (lo.min(0.0), hi) } else { (0.0, 1.0) }
}

/// Renders RE (left) and SSIM (right) of every log.
pub fn convergence_plot(logs: &[&ConvergenceLog]) -> RgbImage {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let pw = (W - 3 * MARGIN) / 2;
    let panels = [
        Panel { x0: MARGIN, y0: MARGIN, w: pw, h: H - 2 * MARGIN },
        Panel { x0: 2 * MARGIN + pw, y0: MARGIN, w: pw, h: H - 2 * MARGIN },
    ];
    panels.iter().for_each(|p| frame(&mut img, p));
    let max_iter = logs.iter().filter_map(|l| l.last()).map(|r| r.iter).max().unwrap_or(1).max(1) as f64;
    let re_range = range(logs.iter().flat_map(|l| l.records.iter().filter_map(|r| r.re)));
    let ssim_range = range(logs.iter().flat_map(|l| l.records.iter().filter_map(|r| r.ssim)));
    for (k, log) in logs.iter().enumerate() {
        let c = Rgb(PALETTE[k % PALETTE.len()]);
        let re: Vec<_> = log.records.iter().filter_map(|r| r.re.map(|v| (r.iter as f64, v))).collect();
        let ss: Vec<_> = log.records.iter().filter_map(|r| r.ssim.map(|v| (r.iter as f64, v))).collect();
        series(&mut img, &panels[0], &re, re_range, max_iter, c);
        series(&mut img, &panels[1], &ss, ssim_range, max_iter, c);
    }
    img
}
