use std::path::Path;

use image::GrayImage;

use super::FigureError;

/// Binary occupancy grid, row-major, `true` = ink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitmap {
    width: u32,
    height: u32,
    ink: Vec<bool>,
}

impl Bitmap {
    /// An empty bitmap; dimensions are clamped to at least 1.
    pub fn new(width: u32, height: u32) -> Self {
        let (width, height) = (width.max(1), height.max(1));
        Bitmap { width, height, ink: vec![false; (width * height) as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    fn index(&self, x: i64, y: i64) -> Option<usize> {
        (x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64).then(|| (y * self.width as i64 + x) as usize)
    }

    /// Out-of-range coordinates read as background.
    pub fn get(&self, x: i64, y: i64) -> bool {
        self.index(x, y).is_some_and(|i| self.ink[i])
    }

    /// Out-of-range writes are ignored.
    pub fn set(&mut self, x: i64, y: i64, value: bool) {
        if let Some(i) = self.index(x, y) {
            self.ink[i] = value;
        }
    }

    pub fn count_ink(&self) -> usize {
        self.ink.iter().filter(|&&b| b).count()
    }

    pub fn ink_pixels(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let w = self.width as usize;
        self.ink.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| ((i % w) as i32, (i / w) as i32))
    }

    pub fn union(&self, other: &Bitmap) -> Bitmap {
        let mut out = self.clone();
        for (x, y) in other.ink_pixels() {
            out.set(x as i64, y as i64, true);
        }
        out
    }

    /// Renders ink as black on white.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| image::Luma([if self.get(x as i64, y as i64) { 0 } else { 255 }]))
    }
}

/// Ink where intensity is below `threshold`.
pub fn binarize(image: &GrayImage, threshold: u8) -> Bitmap {
    let mut out = Bitmap::new(image.width(), image.height());
    for (x, y, p) in image.enumerate_pixels() {
        if p.0[0] < threshold {
            out.set(x as i64, y as i64, true);
        }
    }
    out
}

/// Decodes a PNG or PGM file to 8-bit grayscale.
pub fn load_grayscale(path: &Path) -> Result<GrayImage, FigureError> {
    let img = image::open(path).map_err(|e| FigureError::Image(format!("{}: {e}", path.display())))?;
    Ok(img.to_luma8())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_image_is_empty() {
        let img = GrayImage::from_pixel(20, 10, image::Luma([255]));
        assert_eq!(binarize(&img, 128).count_ink(), 0);
    }

    #[test]
    fn stroke_pixels_counted() {
        let mut img = GrayImage::from_pixel(20, 10, image::Luma([255]));
        for x in 3..13 {
            img.put_pixel(x, 4, image::Luma([0]));
        }
        img.put_pixel(0, 0, image::Luma([128]));
        assert_eq!(binarize(&img, 128).count_ink(), 10);
    }
}
