//! Offline rasterization of snapshot frames.
//!
//! World-to-pixel map for a `width x height` canvas over a world of extent
//! `(W, H)`: `px = x / W * width`, `py = (1 - y / H) * height`, so the world
//! origin is the bottom-left corner and +y points up. Pixel `(i, j)` covers
//! `[i, i+1) x [j, j+1)` and is painted when its center is inside a shape.

use forage_core::records::Frame;
use forage_core::Vec2;
use image::{Rgb, RgbImage};

pub const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
pub const RESOURCE: Rgb<u8> = Rgb([215, 40, 40]);
pub const AGENT: Rgb<u8> = Rgb([40, 80, 220]);
pub const HEADING: Rgb<u8> = Rgb([10, 20, 110]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderStyle {
    pub size: u32,
    pub agent_radius: f64,
    /// Length of the velocity tick, in pixels.
    pub tick_length: f64,
    /// Radius of a resource holding `reference_value`.
    pub resource_radius: f64,
    pub reference_value: f64,
}

impl RenderStyle {
    pub fn new(size: u32, reference_value: f64) -> Self {
        let scale = size as f64 / 1024.0;
        RenderStyle {
            size,
            agent_radius: 3.0 * scale,
            tick_length: 10.0 * scale,
            resource_radius: 8.0 * scale,
            reference_value,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub agents_drawn: usize,
    pub resources_drawn: usize,
}

impl RenderStats {
    pub fn entities(&self) -> usize {
        self.agents_drawn + self.resources_drawn
    }
}

pub fn world_to_pixel(p: Vec2, extent: Vec2, size: u32) -> (f64, f64) {
    let s = size as f64;
    (p.x / extent.x * s, (1.0 - p.y / extent.y) * s)
}

/// Draws resources as red disks with radius proportional to their value
/// (at least one pixel), then agents as blue disks with a tick along their
/// velocity.
pub fn render_frame(frame: &Frame, extent: Vec2, style: &RenderStyle) -> (RgbImage, RenderStats) {
    let mut img = RgbImage::from_pixel(style.size, style.size, BACKGROUND);
    let mut stats = RenderStats::default();

    for r in &frame.resources {
        let (cx, cy) = world_to_pixel(r.position, extent, style.size);
        let radius = if style.reference_value > 0.0 {
            style.resource_radius * r.value / style.reference_value
        } else {
            0.0
        };
        if fill_disk(&mut img, cx, cy, radius, RESOURCE) {
            stats.resources_drawn += 1;
        }
    }
    for a in &frame.agents {
        let (cx, cy) = world_to_pixel(a.position, extent, style.size);
        let drawn = fill_disk(&mut img, cx, cy, style.agent_radius, AGENT);
        let speed = a.velocity.norm();
        if speed > 0.0 {
            let (dx, dy) = (a.velocity.x / speed, -a.velocity.y / speed);
            draw_segment(&mut img, cx, cy, cx + style.tick_length * dx, cy + style.tick_length * dy, HEADING);
        }
        if drawn {
            stats.agents_drawn += 1;
        }
    }
    (img, stats)
}

/// Paints pixels whose centers lie within `radius`; a disk too small to
/// cover any center paints the pixel containing its center. Returns whether
/// anything landed on the canvas.
fn fill_disk(img: &mut RgbImage, cx: f64, cy: f64, radius: f64, color: Rgb<u8>) -> bool {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut painted = false;
    let r2 = radius * radius;
    let (x0, x1) = ((cx - radius).floor() as i64, (cx + radius).ceil() as i64);
    let (y0, y1) = ((cy - radius).floor() as i64, (cy + radius).ceil() as i64);
    for j in y0.max(0)..=y1.min(h - 1) {
        for i in x0.max(0)..=x1.min(w - 1) {
            let dx = i as f64 + 0.5 - cx;
            let dy = j as f64 + 0.5 - cy;
            if dx * dx + dy * dy <= r2 {
                img.put_pixel(i as u32, j as u32, color);
                painted = true;
            }
        }
    }
    if !painted {
        let (i, j) = (cx.floor() as i64, cy.floor() as i64);
        if (0..w).contains(&i) && (0..h).contains(&j) {
            img.put_pixel(i as u32, j as u32, color);
            painted = true;
        }
    }
    painted
}

fn draw_segment(img: &mut RgbImage, x0: f64, y0: f64, x1: f64, y1: f64, color: Rgb<u8>) {
    let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let n = (len * 4.0).ceil().max(1.0) as usize;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (i, j) = (x.floor(), y.floor());
        if i >= 0.0 && j >= 0.0 && i < img.width() as f64 && j < img.height() as f64 {
            img.put_pixel(i as u32, j as u32, color);
        }
    }
}
