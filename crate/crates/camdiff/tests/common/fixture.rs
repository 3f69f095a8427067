//! Synthetic COD-style datasets written to disk.

use std::fs;
use std::path::{Path, PathBuf};

use camdiff_core::compositor::{encode_png, encode_png_gray};
use camdiff_core::ImageBuffer;

#[derive(Debug, Clone, Copy)]
pub enum Object {
    /// Foreground rectangle `(x, y, w, h)`.
    Rect(u32, u32, u32, u32),
    /// Every pixel is foreground.
    Full,
    /// No foreground at all.
    Empty,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub object: Object,
}

impl Sample {
    pub fn new(name: &str, width: u32, height: u32, object: Object) -> Self {
        Self {
            name: name.into(),
            width,
            height,
            object,
        }
    }

    fn is_fg(&self, x: u32, y: u32) -> bool {
        match self.object {
            Object::Rect(ox, oy, ow, oh) => x >= ox && x < ox + ow && y >= oy && y < oy + oh,
            Object::Full => true,
            Object::Empty => false,
        }
    }

    pub fn image(&self) -> ImageBuffer {
        let seed = self
            .name
            .bytes()
            .fold(7u32, |h, b| h.wrapping_mul(31) ^ u32::from(b));
        let mut pixels = Vec::with_capacity((self.width * self.height * 3) as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                let t = x.wrapping_mul(3) ^ y.wrapping_mul(5) ^ seed;
                let fg = if self.is_fg(x, y) { 40 } else { 0 };
                pixels.extend([(t % 97) as u8 + fg, (t % 113) as u8 + fg, (t % 89) as u8]);
            }
        }
        ImageBuffer::new(self.width, self.height, pixels).unwrap()
    }

    pub fn gt(&self) -> Vec<u8> {
        let mut values = Vec::with_capacity((self.width * self.height) as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                values.push(if self.is_fg(x, y) { 255 } else { 0 });
            }
        }
        values
    }
}

/// Ten pairs that all have room for a mask.
pub fn clean_pairs() -> Vec<Sample> {
    (0..10u32)
        .map(|i| {
            Sample::new(
                &format!("clean_{i:02}.png"),
                80 + 4 * i,
                64,
                Object::Rect(4 + i, 6, 16, 12 + i),
            )
        })
        .collect()
}

/// Ten pairs: eight with a small object, two whose GT is all foreground.
pub fn ten_pairs() -> Vec<Sample> {
    let mut samples = Vec::new();
    for i in 0..8u32 {
        let name = if i % 2 == 0 {
            format!("COD10K-CAM-1-Aquatic-{}-BatFish-{i}.png", i + 1)
        } else {
            format!("camo_{i:03}.png")
        };
        let (w, h) = (96 + 8 * i, 72 + 4 * i);
        samples.push(Sample::new(
            &name,
            w,
            h,
            Object::Rect(10 + 3 * i, 8 + 2 * i, 14 + i, 12),
        ));
    }
    samples.push(Sample::new("full_a.png", 80, 60, Object::Full));
    samples.push(Sample::new("full_b.png", 64, 64, Object::Full));
    samples
}

pub fn write_dataset(root: &Path, samples: &[Sample]) -> PathBuf {
    let imgs = root.join("Imgs");
    let gts = root.join("GT");
    fs::create_dir_all(&imgs).unwrap();
    fs::create_dir_all(&gts).unwrap();
    for s in samples {
        fs::write(imgs.join(&s.name), encode_png(&s.image()).unwrap()).unwrap();
        let stem = Path::new(&s.name)
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .into_owned();
        fs::write(
            gts.join(format!("{stem}.png")),
            encode_png_gray(s.width, s.height, &s.gt()).unwrap(),
        )
        .unwrap();
    }
    root.to_path_buf()
}

/// Every file under `dir`, relative path and contents, sorted by path.
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
