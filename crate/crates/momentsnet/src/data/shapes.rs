//! Parametric silhouette generator: a self-contained stand-in for a rotated
//! binary-shape database. Nine prototypes are rendered at evenly spaced
//! angles with per-replica jitter (translation, scale, aspect and a shape
//! "wobble"), rasterized at high resolution, then downscaled and binarized.

use super::{Dataset, Image};
use crate::error::DataError;
use crate::grid::Grid;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator parameters.
#[derive(Debug, Clone, Copy)]
pub struct ShapeGenConfig {
    pub classes: usize,
    pub rotations: usize,
    pub replicas: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for ShapeGenConfig {
    fn default() -> Self {
        ShapeGenConfig {
            classes: 9,
            rotations: 12,
            replicas: 12,
            size: 32,
            seed: 0,
        }
    }
}

pub const PROTOTYPE_NAMES: [&str; 9] = [
    "triangle", "square", "star", "cross", "keyhole", "ellipse", "crescent", "hbar", "ring",
];

/// Per-instance geometric jitter, applied before the class rotation. The
/// boundary wave gives each replica its own edge texture, standing in for
/// the distinct physical instances of a real shape database.
#[derive(Debug, Clone, Copy)]
struct Jitter {
    scale_x: f64,
    scale_y: f64,
    shift_x: f64,
    shift_y: f64,
    wobble: [f64; 3],
    wave_amp: f64,
    wave_freq: u32,
    wave_phase: f64,
}

impl Jitter {
    fn identity() -> Self {
        Jitter {
            scale_x: 1.0,
            scale_y: 1.0,
            shift_x: 0.0,
            shift_y: 0.0,
            wobble: [0.0; 3],
            wave_amp: 0.0,
            wave_freq: 3,
            wave_phase: 0.0,
        }
    }

    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Jitter {
            scale_x: rng.random_range(0.82..1.08),
            scale_y: rng.random_range(0.82..1.08),
            shift_x: rng.random_range(-0.10..0.10),
            shift_y: rng.random_range(-0.10..0.10),
            wobble: [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ],
            wave_amp: rng.random_range(0.01..0.035),
            wave_freq: rng.random_range(3..=7),
            wave_phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }
}

/// Point-in-silhouette test in normalized [-1,1] coordinates. The three
/// wobble knobs deform each prototype aggressively, so replicas of a class
/// behave like genuinely distinct object instances.
fn inside(prototype: usize, x: f64, y: f64, w: [f64; 3]) -> bool {
    let r = x.hypot(y);
    match prototype {
        // Triangle, apex up, with variable width and edge bowing.
        0 => {
            let size = 0.78 * (1.0 + 0.10 * w[0]);
            let half_base = size * 0.866 * (1.0 + 0.25 * w[1]);
            let top = -size;
            let bottom = size * 0.5;
            if y < top || y > bottom {
                return false;
            }
            let t = (y - top) / (bottom - top);
            x.abs() <= t.powf(1.0 + 0.30 * w[2]) * half_base
        }
        // Square morphing through superellipse corner rounding.
        1 => {
            let half = 0.56 * (1.0 + 0.10 * w[0]);
            let aspect = 1.0 + 0.20 * w[1];
            let p = 4.5 + 2.5 * w[2]; // 2.0..7.0: soft to sharp corners
            (x / half).abs().powf(p) + (y * aspect / half).abs().powf(p) <= 1.0
        }
        // Star with 4-6 spikes and variable spike depth.
        2 => {
            let points = (5.0 + w[2].round()) as f64;
            let outer = 0.85 * (1.0 + 0.06 * w[0]);
            let inner = 0.34 * (1.0 + 0.35 * w[1]);
            let sector = std::f64::consts::PI / points;
            let theta = y.atan2(x).rem_euclid(2.0 * sector);
            let t = (theta - sector).abs() / sector; // 1 at spikes, 0 between
            r <= inner + (outer - inner) * t
        }
        // Plus / cross with asymmetric arm reaches and widths.
        3 => {
            let arm_v = 0.24 * (1.0 + 0.30 * w[1]);
            let arm_h = 0.24 * (1.0 - 0.30 * w[1]);
            let up = 0.78 * (1.0 + 0.18 * w[0]);
            let down = 0.78 * (1.0 - 0.18 * w[0]);
            let left = 0.78 * (1.0 + 0.18 * w[2]);
            let right = 0.78 * (1.0 - 0.18 * w[2]);
            (x.abs() <= arm_v && -up <= y && y <= down)
                || (y.abs() <= arm_h && -left <= x && x <= right)
        }
        // Keyhole: disk on top, laterally drifting slot running down.
        4 => {
            let head_r = 0.40 * (1.0 + 0.18 * w[1]);
            let head = (x, y + 0.32);
            let in_head = head.0.hypot(head.1) <= head_r;
            let slot_center = 0.10 * w[2];
            let slot = 0.15 * (1.0 + 0.25 * w[1]);
            let in_slot =
                (x - slot_center).abs() <= slot && (-0.05..=0.78 * (1.0 + 0.08 * w[0])).contains(&y);
            in_head || in_slot
        }
        // Ellipse with wide eccentricity range and shear.
        5 => {
            let a = 0.80 * (1.0 + 0.06 * w[0]);
            let b = 0.38 * (1.0 + 0.35 * w[1]);
            let tilt = 0.25 * w[2];
            let xs = x + tilt * y;
            (xs / a).powi(2) + (y / b).powi(2) <= 1.0
        }
        // Crescent: disk minus an offset disk.
        6 => {
            let bite = 0.55 * (1.0 + 0.25 * w[1]);
            let offset = 0.34 * (1.0 + 0.35 * w[2]);
            r <= 0.72 * (1.0 + 0.06 * w[0]) && (x - offset).hypot(y) > bite
        }
        // Capital H with variable bars and a vertically drifting bridge.
        7 => {
            let bar = 0.16 * (1.0 + 0.30 * w[1]);
            let bridge = 0.14 * (1.0 + 0.25 * w[1]);
            let bridge_y = 0.35 * w[2];
            let height = 0.76 * (1.0 + 0.08 * w[0]);
            let upright = ((x - 0.5).abs() <= bar || (x + 0.5).abs() <= bar) && y.abs() <= height;
            let cross = (y - bridge_y).abs() <= bridge && x.abs() <= 0.5;
            upright || cross
        }
        // Ring / annulus with an off-center hole.
        8 => {
            let outer = 0.78;
            let hole_r = 0.38 * (1.0 + 0.18 * w[0]);
            let (hx, hy) = (0.15 * w[2], 0.15 * w[1]);
            r <= outer && (x - hx).hypot(y - hy) >= hole_r
        }
        _ => unreachable!("prototype index out of range"),
    }
}

/// Oversampled raster resolution: at least 128 on a side.
fn render_resolution(size: usize) -> usize {
    let factor = 128usize.div_ceil(size).max(2);
    size * factor
}

fn render(prototype: usize, angle_deg: f64, size: usize, jitter: &Jitter) -> Grid<f64> {
    let hi = render_resolution(size);
    let factor = hi / size;
    let angle = angle_deg.to_radians();
    let (sin_a, cos_a) = angle.sin_cos();
    let mut high = vec![0.0f64; hi * hi];
    for row in 0..hi {
        let v = (2 * row + 1) as f64 / hi as f64 - 1.0;
        for col in 0..hi {
            let u = (2 * col + 1) as f64 / hi as f64 - 1.0;
            // Undo jitter, then undo the class rotation.
            let px = (u - jitter.shift_x) / jitter.scale_x;
            let py = (v - jitter.shift_y) / jitter.scale_y;
            let mut rx = cos_a * px + sin_a * py;
            let mut ry = -sin_a * px + cos_a * py;
            // Angular boundary wave in the shape frame, so it rotates with
            // the shape and rotation still commutes with rendering.
            if jitter.wave_amp > 0.0 {
                let theta = ry.atan2(rx);
                let factor =
                    1.0 + jitter.wave_amp * (jitter.wave_freq as f64 * theta + jitter.wave_phase).sin();
                rx /= factor;
                ry /= factor;
            }
            if inside(prototype, rx, ry, jitter.wobble) {
                high[row * hi + col] = 1.0;
            }
        }
    }
    // Box-average down to `size`, then binarize at 0.5.
    let mut out = Grid::zeros(size, size);
    let cell = (factor * factor) as f64;
    for r in 0..size {
        for c in 0..size {
            let mut acc = 0.0;
            for dr in 0..factor {
                for dc in 0..factor {
                    acc += high[(r * factor + dr) * hi + c * factor + dc];
                }
            }
            out.set(r, c, if acc / cell >= 0.5 { 1.0 } else { 0.0 });
        }
    }
    out
}

/// Renders a prototype at a given angle without jitter; the raw class
/// template behind the generated variants.
pub fn render_prototype(prototype: usize, angle_deg: f64, size: usize) -> Grid<f64> {
    render(prototype, angle_deg, size, &Jitter::identity())
}

fn mix_seed(seed: u64, class: usize, replica: usize) -> u64 {
    // splitmix64 over a composite key.
    let mut z = seed
        .wrapping_add((class as u64) << 32)
        .wrapping_add(replica as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates the deterministic synthetic dataset: `classes` prototypes x
/// `rotations` evenly spaced angles x `replicas` jittered instances.
pub fn generate_shapes(config: &ShapeGenConfig) -> Result<Dataset, DataError> {
    if config.classes == 0 || config.classes > PROTOTYPE_NAMES.len() {
        return Err(DataError::InvalidCounts(format!(
            "classes must lie in 1..={}, got {}",
            PROTOTYPE_NAMES.len(),
            config.classes
        )));
    }
    if config.rotations == 0 || 360 % config.rotations != 0 {
        return Err(DataError::InvalidCounts(format!(
            "rotations must divide 360, got {}",
            config.rotations
        )));
    }
    if config.replicas == 0 {
        return Err(DataError::InvalidCounts("replicas must be positive".into()));
    }
    if config.size < 8 {
        return Err(DataError::InvalidCounts(format!(
            "size must be at least 8, got {}",
            config.size
        )));
    }
    let step = 360.0 / config.rotations as f64;
    // (class, replica, rotation) keys, rendered independently and in order.
    let keys: Vec<(usize, usize, usize)> = (0..config.classes)
        .flat_map(|class| {
            (0..config.replicas).flat_map(move |replica| {
                (0..config.rotations).map(move |rot| (class, replica, rot))
            })
        })
        .collect();
    let images: Vec<Image> = keys
        .par_iter()
        .map(|&(class, replica, rot)| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, class, replica));
            let jitter = Jitter::sample(&mut rng);
            let grid = render(class, rot as f64 * step, config.size, &jitter);
            Image {
                grid,
                label: Some(class as u32),
            }
        })
        .collect();
    Ok(Dataset {
        images,
        class_names: PROTOTYPE_NAMES[..config.classes]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        provenance: format!(
            "synthetic(classes={}, rotations={}, replicas={}, size={}, seed={})",
            config.classes, config.rotations, config.replicas, config.size, config.seed
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_matches_protocol_counts() {
        let ds = generate_shapes(&ShapeGenConfig::default()).unwrap();
        assert_eq!(ds.class_names.len(), 9);
        assert_eq!(ds.len(), 9 * 144);
        assert!(ds.class_counts().iter().all(|&c| c == 144));
        assert_eq!(ds.images[0].grid.rows(), 32);
    }

    #[test]
    fn images_are_binary() {
        let config = ShapeGenConfig {
            classes: 3,
            rotations: 4,
            replicas: 2,
            size: 16,
            seed: 1,
        };
        let ds = generate_shapes(&config).unwrap();
        for img in &ds.images {
            assert!(img.grid.values().iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let config = ShapeGenConfig {
            classes: 4,
            rotations: 6,
            replicas: 3,
            size: 16,
            seed: 33,
        };
        let a = generate_shapes(&config).unwrap();
        let b = generate_shapes(&config).unwrap();
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.grid.values(), y.grid.values());
            assert_eq!(x.label, y.label);
        }
        let other = generate_shapes(&ShapeGenConfig { seed: 34, ..config }).unwrap();
        let differs = a
            .images
            .iter()
            .zip(&other.images)
            .any(|(x, y)| x.grid.values() != y.grid.values());
        assert!(differs);
    }

    /// Chebyshev-1 dilation containment: every on-pixel of `a` has an
    /// on-pixel of `b` within distance one.
    fn within_one_dilation(a: &Grid<f64>, b: &Grid<f64>) -> bool {
        let n = a.rows() as isize;
        for r in 0..n {
            for c in 0..n {
                if *a.get(r as usize, c as usize) != 1.0 {
                    continue;
                }
                let mut hit = false;
                'search: for dr in -1..=1 {
                    for dc in -1..=1 {
                        let (rr, cc) = (r + dr, c + dc);
                        if rr >= 0 && rr < n && cc >= 0 && cc < n
                            && *b.get(rr as usize, cc as usize) == 1.0
                        {
                            hit = true;
                            break 'search;
                        }
                    }
                }
                if !hit {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn render_then_rotate_matches_rotate_then_render() {
        for prototype in 0..PROTOTYPE_NAMES.len() {
            let base = render_prototype(prototype, 0.0, 32);
            let grid_rotated = base.rotated_90_cw();
            // Rotating the raster by a quarter turn must land on the variant
            // rendered at the quarter-turn angle, within one pixel.
            let rendered = render_prototype(prototype, 90.0, 32);
            assert!(
                within_one_dilation(&grid_rotated, &rendered)
                    && within_one_dilation(&rendered, &grid_rotated),
                "prototype {prototype} mismatch"
            );
        }
    }

    #[test]
    fn prototypes_are_mutually_distinct() {
        let rendered: Vec<Grid<f64>> = (0..9).map(|p| render_prototype(p, 0.0, 32)).collect();
        for i in 0..9 {
            for j in (i + 1)..9 {
                let diff = rendered[i]
                    .values()
                    .iter()
                    .zip(rendered[j].values())
                    .filter(|(a, b)| a != b)
                    .count();
                assert!(diff > 30, "prototypes {i} and {j} nearly identical");
            }
        }
    }

    #[test]
    fn invalid_counts_are_rejected() {
        let bad_classes = ShapeGenConfig {
            classes: 10,
            ..ShapeGenConfig::default()
        };
        assert!(generate_shapes(&bad_classes).is_err());
        let bad_rotations = ShapeGenConfig {
            rotations: 7,
            ..ShapeGenConfig::default()
        };
        assert!(generate_shapes(&bad_rotations).is_err());
        let bad_size = ShapeGenConfig {
            size: 4,
            ..ShapeGenConfig::default()
        };
        assert!(generate_shapes(&bad_size).is_err());
    }
}
