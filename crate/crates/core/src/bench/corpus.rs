//! Source images for the benchmark: a directory of photos, or a seeded
//! generator of photo-like scenes when no corpus is at hand.

use std::path::{Path, PathBuf};

use crate::cipher::KeyStream;
use crate::error::{Error, Result};
use crate::image::PixelImage;

#[derive(Debug, Clone)]
pub struct SourceImage {
    pub id: String,
    pub image: PixelImage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    /// Image files from a directory, sorted by file name.
    Directory(PathBuf),
    Synthetic {
        width: usize,
        height: usize,
        seed: u64,
    },
}

impl CorpusSource {
    /// Synthetic scenes with the 640x480 geometry used in the experiments.
    pub fn synthetic(seed: u64) -> Self {
        CorpusSource::Synthetic {
            width: 640,
            height: 480,
            seed,
        }
    }

    pub fn load(&self, count: usize) -> Result<Vec<SourceImage>> {
        match self {
            CorpusSource::Directory(dir) => load_directory(dir, count),
            CorpusSource::Synthetic {
                width,
                height,
                seed,
            } => (0..count)
                .map(|i| {
                    Ok(SourceImage {
                        id: format!("synthetic-{i:04}"),
                        image: synthetic_scene(*width, *height, seed.wrapping_add(i as u64))?,
                    })
                })
                .collect(),
        }
    }
}

const EXTENSIONS: &[&str] = &["jpg", "jpeg", "png", "bmp", "ppm", "pgm"];

/// Loads the first `count` images (by file name), cropped to whole blocks.
pub fn load_directory(dir: &Path, count: usize) -> Result<Vec<SourceImage>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    if paths.len() < count {
        return Err(Error::Corpus(format!(
            "{} holds {} images, {count} requested",
            dir.display(),
            paths.len()
        )));
    }
    paths
        .iter()
        .take(count)
        .map(|p| {
            let image = PixelImage::open(p)?.to_rgb().crop_to_blocks();
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(SourceImage { id, image })
        })
        .collect()
}

fn unit(g: &mut KeyStream) -> f32 {
    (g.next_u64() >> 40) as f32 / (1u64 << 24) as f32
}

fn range(g: &mut KeyStream, lo: f32, hi: f32) -> f32 {
    lo + (hi - lo) * unit(g)
}

/// Bilinearly interpolated random lattice, one octave of value noise.
struct ValueNoise {
    cells_x: usize,
    cells_y: usize,
    lattice: Vec<f32>,
}

impl ValueNoise {
    fn new(g: &mut KeyStream, cells_x: usize, cells_y: usize) -> Self {
        let lattice = (0..(cells_x + 1) * (cells_y + 1))
            .map(|_| unit(g) * 2.0 - 1.0)
            .collect();
        Self {
            cells_x,
            cells_y,
            lattice,
        }
    }

    /// `u`, `v` in [0, 1].
    fn at(&self, u: f32, v: f32) -> f32 {
        let fx = u * self.cells_x as f32;
        let fy = v * self.cells_y as f32;
        let x0 = (fx as usize).min(self.cells_x - 1);
        let y0 = (fy as usize).min(self.cells_y - 1);
        let (tx, ty) = (fx - x0 as f32, fy - y0 as f32);
        let (tx, ty) = (tx * tx * (3.0 - 2.0 * tx), ty * ty * (3.0 - 2.0 * ty));
        let w = self.cells_x + 1;
        let l = |x: usize, y: usize| self.lattice[y * w + x];
        let top = l(x0, y0) * (1.0 - tx) + l(x0 + 1, y0) * tx;
        let bottom = l(x0, y0 + 1) * (1.0 - tx) + l(x0 + 1, y0 + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

struct Blob {
    cx: f32,
    cy: f32,
    rx: f32,
    ry: f32,
    cos: f32,
    sin: f32,
    softness: f32,
    color: [f32; 3],
    stripes: Option<(f32, f32, f32)>,
}

/// A seeded scene: lit background gradient, a handful of soft-edged
/// objects (some striped), multi-octave texture and mild sensor noise.
pub fn synthetic_scene(width: usize, height: usize, seed: u64) -> Result<PixelImage> {
    let mut g = KeyStream::from_seed(seed ^ 0x5CE7_E5EE_D000_0000);
    let base_a = [range(&mut g, 20.0, 235.0), range(&mut g, 20.0, 235.0), range(&mut g, 20.0, 235.0)];
    let base_b = [range(&mut g, 20.0, 235.0), range(&mut g, 20.0, 235.0), range(&mut g, 20.0, 235.0)];
    let angle = range(&mut g, 0.0, std::f32::consts::TAU);
    let (gdx, gdy) = (angle.cos(), angle.sin());

    let octaves: Vec<(ValueNoise, f32)> = [(3, 28.0), (9, 14.0), (27, 7.0), (80, 4.0)]
        .iter()
        .map(|&(cells, amp)| {
            let cy = (cells * height / width.max(1)).max(2);
            (ValueNoise::new(&mut g, cells.max(2), cy), amp * range(&mut g, 0.5, 1.5))
        })
        .collect();
    let tint = ValueNoise::new(&mut g, 4, 3);

    let n_blobs = 4 + g.below(9) as usize;
    let blobs: Vec<Blob> = (0..n_blobs)
        .map(|_| {
            let rot = range(&mut g, 0.0, std::f32::consts::PI);
            let striped = g.below(3) == 0;
            Blob {
                cx: range(&mut g, -0.1, 1.1),
                cy: range(&mut g, -0.1, 1.1),
                rx: range(&mut g, 0.05, 0.45),
                ry: range(&mut g, 0.05, 0.45),
                cos: rot.cos(),
                sin: rot.sin(),
                softness: range(&mut g, 0.02, 0.3),
                color: [range(&mut g, 0.0, 255.0), range(&mut g, 0.0, 255.0), range(&mut g, 0.0, 255.0)],
                stripes: striped.then(|| {
                    (
                        range(&mut g, 10.0, 80.0),
                        range(&mut g, 0.0, std::f32::consts::TAU),
                        range(&mut g, 15.0, 60.0),
                    )
                }),
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(width * height * 3);
    let aspect = height as f32 / width as f32;
    for y in 0..height {
        let v = y as f32 / height as f32;
        for x in 0..width {
            let u = x as f32 / width as f32;
            let t = ((u - 0.5) * gdx + (v - 0.5) * gdy + 0.5).clamp(0.0, 1.0);
            let mut px = [0f32; 3];
            for c in 0..3 {
                px[c] = base_a[c] * (1.0 - t) + base_b[c] * t;
            }
            for blob in &blobs {
                let (dx, dy) = (u - blob.cx, (v - blob.cy) * aspect);
                let (lx, ly) = (dx * blob.cos + dy * blob.sin, -dx * blob.sin + dy * blob.cos);
                let r = ((lx / blob.rx).powi(2) + (ly / blob.ry).powi(2)).sqrt();
                let alpha = ((1.0 - r) / blob.softness).clamp(0.0, 1.0);
                if alpha <= 0.0 {
                    continue;
                }
                let shade = match blob.stripes {
                    Some((freq, phase, amp)) => amp * (freq * lx + phase).sin(),
                    None => -25.0 * r,
                };
                for c in 0..3 {
                    px[c] = px[c] * (1.0 - alpha) + (blob.color[c] + shade) * alpha;
                }
            }
            let texture: f32 = octaves.iter().map(|(n, amp)| n.at(u, v) * amp).sum();
            let warm = tint.at(u, v) * 12.0;
            let grain = (unit(&mut g) - 0.5) * 6.0;
            let add = [texture + warm, texture, texture - warm];
            for c in 0..3 {
                samples.push((px[c] + add[c] + grain).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    PixelImage::new(width, height, 3, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_is_deterministic_and_seed_dependent() {
        let a = synthetic_scene(64, 48, 1).unwrap();
        assert_eq!(a, synthetic_scene(64, 48, 1).unwrap());
        assert_ne!(a, synthetic_scene(64, 48, 2).unwrap());
    }

    #[test]
    fn synthetic_uses_the_value_range() {
        let img = synthetic_scene(160, 120, 7).unwrap();
        let (lo, hi) = img
            .samples()
            .iter()
            .fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi - lo > 100, "range {lo}..{hi}");
    }

    #[test]
    fn directory_loading_sorts_and_crops() {
        let dir = tempfile::tempdir().unwrap();
        for (name, w) in [("b.png", 20usize), ("a.png", 17)] {
            PixelImage::filled(w, 12, 3, 9).unwrap().save_png(dir.path().join(name)).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let imgs = load_directory(dir.path(), 2).unwrap();
        assert_eq!(imgs[0].id, "a");
        assert_eq!((imgs[0].image.width(), imgs[0].image.height()), (16, 8));
        assert!(load_directory(dir.path(), 3).is_err());
    }
}
