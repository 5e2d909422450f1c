//! Static plot emission: feature-map slice heatmaps and node-edge graph
//! renderings, written as PNG files.

use grrail_core::{ClusterGraph, Dims, RoiMask, VoxelGrid};
use image::{Rgb, RgbImage};

/// Blue -> cyan -> yellow -> red ramp over [0, 1].
fn colormap(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 1.0 / 3.0 {
        let u = 3.0 * t;
        (0.0, u, 1.0)
    } else if t < 2.0 / 3.0 {
        let u = 3.0 * t - 1.0;
        (u, 1.0, 1.0 - u)
    } else {
        let u = 3.0 * t - 2.0;
        (1.0, 1.0 - u, 0.0)
    };
    Rgb([(255.0 * r) as u8, (255.0 * g) as u8, (255.0 * b) as u8])
}

/// Heatmap of the mid-axial slice of a map volume, colored over the ROI
/// value range, black background, white ROI outline. `scale` is the
/// nearest-neighbor upsampling factor.
pub fn render_slice_heatmap(map: &VoxelGrid, mask: &RoiMask, scale: u32) -> RgbImage {
    let d: Dims = map.dims;
    let z = d.nz / 2;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (idx, &inside) in mask.flags.iter().enumerate() {
        if inside {
            lo = lo.min(map.values[idx]);
            hi = hi.max(map.values[idx]);
        }
    }
    let range = if hi > lo { hi - lo } else { 1.0 };

    let mut img = RgbImage::new(d.nx as u32 * scale, d.ny as u32 * scale);
    for y in 0..d.ny {
        for x in 0..d.nx {
            let idx = d.index(x, y, z);
            let color = if mask.flags[idx] {
                let is_boundary = neighbors26_2d(d, x, y, z).any(|nidx| !mask.flags[nidx]);
                if is_boundary {
                    Rgb([255, 255, 255])
                } else {
                    colormap((map.values[idx] - lo) / range)
                }
            } else {
                Rgb([0, 0, 0])
            };
            for dy in 0..scale {
                for dx in 0..scale {
                    img.put_pixel(x as u32 * scale + dx, y as u32 * scale + dy, color);
                }
            }
        }
    }
    img
}

fn neighbors26_2d(d: Dims, x: usize, y: usize, z: usize) -> impl Iterator<Item = usize> {
    let (nx, ny) = (d.nx as i64, d.ny as i64);
    let (x, y) = (x as i64, y as i64);
    (-1i64..=1)
        .flat_map(move |dy| (-1i64..=1).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx != 0 || dy != 0)
        .filter_map(move |(dx, dy)| {
            let (px, py) = (x + dx, y + dy);
            (px >= 0 && py >= 0 && px < nx && py < ny)
                .then(|| d.index(px as usize, py as usize, z))
        })
}

/// Node-edge rendering of a cluster graph: centroids projected onto the xy
/// plane, edge brightness by weight, node radius by member count, node
/// color by mean value.
pub fn render_graph(graph: &ClusterGraph, side: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(side, side, Rgb([10, 10, 20]));
    if graph.nodes.is_empty() {
        return img;
    }
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in &graph.nodes {
        lo_x = lo_x.min(n.centroid[0]);
        hi_x = hi_x.max(n.centroid[0]);
        lo_y = lo_y.min(n.centroid[1]);
        hi_y = hi_y.max(n.centroid[1]);
    }
    let margin = side as f64 * 0.12;
    let span = (side as f64 - 2.0 * margin).max(1.0);
    let place = |n: &grrail_core::GraphNode| -> (f64, f64) {
        let tx = if hi_x > lo_x { (n.centroid[0] - lo_x) / (hi_x - lo_x) } else { 0.5 };
        let ty = if hi_y > lo_y { (n.centroid[1] - lo_y) / (hi_y - lo_y) } else { 0.5 };
        (margin + tx * span, margin + ty * span)
    };

    let max_w = graph.edges.iter().map(|e| e.weight).fold(0.0, f64::max);
    for e in &graph.edges {
        let (x0, y0) = place(&graph.nodes[e.a]);
        let (x1, y1) = place(&graph.nodes[e.b]);
        let t = if max_w > 0.0 { e.weight / max_w } else { 1.0 };
        let shade = (80.0 + 175.0 * t) as u8;
        draw_line(&mut img, x0, y0, x1, y1, Rgb([shade, shade, shade]));
    }

    let max_members = graph.nodes.iter().map(|n| n.member_count).max().unwrap_or(1) as f64;
    let (mut lo_v, mut hi_v) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in &graph.nodes {
        lo_v = lo_v.min(n.mean_value);
        hi_v = hi_v.max(n.mean_value);
    }
    for n in &graph.nodes {
        let (x, y) = place(n);
        let r = 6.0 + 14.0 * (n.member_count as f64 / max_members).sqrt();
        let t = if hi_v > lo_v { (n.mean_value - lo_v) / (hi_v - lo_v) } else { 0.5 };
        draw_disc(&mut img, x, y, r, colormap(t));
    }
    img
}

fn draw_line(img: &mut RgbImage, x0: f64, y0: f64, x1: f64, y1: f64, color: Rgb<u8>) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = x0 + t * (x1 - x0);
        let y = y0 + t * (y1 - y0);
        let (xi, yi) = (x.round() as i64, y.round() as i64);
        if xi >= 0 && yi >= 0 && (xi as u32) < img.width() && (yi as u32) < img.height() {
            img.put_pixel(xi as u32, yi as u32, color);
        }
    }
}

fn draw_disc(img: &mut RgbImage, cx: f64, cy: f64, radius: f64, color: Rgb<u8>) {
    let r = radius.ceil() as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx * dx + dy * dy) as f64 <= radius * radius {
                let (x, y) = (cx.round() as i64 + dx, cy.round() as i64 + dy);
                if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                    img.put_pixel(x as u32, y as u32, color);
                }
            }
        }
    }
}
