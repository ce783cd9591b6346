use serde::{Deserialize, Serialize};

use super::axes::AxisFrame;
use super::FigureError;

/// Affine pixel/world transform anchored at the origin pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordMap {
    pub origin: (f64, f64),
    /// Pixels per world unit along x.
    pub sx: f64,
    /// Pixels per world unit along y.
    pub sy: f64,
    /// Pixel y grows downward.
    pub y_flip: bool,
}

impl CoordMap {
    pub fn world_to_pixel(&self, p: (f64, f64)) -> (f64, f64) {
        let dy = self.sy * p.1;
        (self.origin.0 + self.sx * p.0, if self.y_flip { self.origin.1 - dy } else { self.origin.1 + dy })
    }

    pub fn pixel_to_world(&self, p: (f64, f64)) -> (f64, f64) {
        let dy = p.1 - self.origin.1;
        ((p.0 - self.origin.0) / self.sx, if self.y_flip { -dy / self.sy } else { dy / self.sy })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    /// Pixels per world unit on both axes.
    Unit(f64),
    /// Two `(world, pixel)` correspondences.
    TwoPoints { a: ((f64, f64), (f64, f64)), b: ((f64, f64), (f64, f64)) },
}

/// Default: one world unit is a tenth of the x-axis length.
pub fn make_mapping(frame: &AxisFrame, calibration: Option<&Calibration>) -> Result<CoordMap, FigureError> {
    let (sx, sy) = match calibration {
        None => {
            let unit = frame.x_axis.length() / 10.0;
            (unit, unit)
        }
        Some(Calibration::Unit(u)) => (*u, *u),
        Some(Calibration::TwoPoints { a, b }) => {
            let (dwx, dwy) = ((b.0 .0 - a.0 .0).abs(), (b.0 .1 - a.0 .1).abs());
            let (dpx, dpy) = ((b.1 .0 - a.1 .0).abs(), (b.1 .1 - a.1 .1).abs());
            let sx = (dwx > 0.0).then(|| dpx / dwx);
            let sy = (dwy > 0.0).then(|| dpy / dwy);
            match (sx, sy) {
                (Some(sx), Some(sy)) => (sx, sy),
                (Some(s), None) | (None, Some(s)) => (s, s),
                (None, None) => return Err(FigureError::DegenerateCalibration),
            }
        }
    };
    if !(sx.is_finite() && sy.is_finite() && sx > 0.0 && sy > 0.0) {
        return Err(FigureError::DegenerateCalibration);
    }
    Ok(CoordMap { origin: frame.origin, sx, sy, y_flip: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figure::{Rect, Segment};

    fn frame(origin: (f64, f64)) -> AxisFrame {
        AxisFrame {
            x_axis: Segment { start: (origin.0 - 50.0, origin.1), end: (origin.0 + 350.0, origin.1) },
            y_axis: Segment { start: (origin.0, origin.1 - 300.0), end: (origin.0, origin.1 + 20.0) },
            origin,
            bbox: Rect::new(origin.0 - 50.0, origin.1 - 300.0, 400.0, 320.0),
            x_thickness: 1.0,
            y_thickness: 1.0,
        }
    }

    #[test]
    fn unit_calibration() {
        let m = make_mapping(&frame((100.0, 400.0)), Some(&Calibration::Unit(40.0))).unwrap();
        assert_eq!(m.world_to_pixel((2.0, 1.0)), (180.0, 360.0));
        assert_eq!(m.pixel_to_world((180.0, 360.0)), (2.0, 1.0));
        assert_eq!(m.world_to_pixel((0.0, 0.0)), (100.0, 400.0));
    }

    #[test]
    fn two_point_calibration() {
        let cal = Calibration::TwoPoints { a: ((0.0, 0.0), (100.0, 400.0)), b: ((5.0, 0.0), (300.0, 400.0)) };
        let m = make_mapping(&frame((100.0, 400.0)), Some(&cal)).unwrap();
        assert_eq!(m.sx, 40.0);
        let same = Calibration::TwoPoints { a: ((1.0, 1.0), (100.0, 400.0)), b: ((1.0, 1.0), (100.0, 400.0)) };
        assert_eq!(make_mapping(&frame((100.0, 400.0)), Some(&same)), Err(FigureError::DegenerateCalibration));
    }

    #[test]
    fn default_unit_is_tenth_of_axis() {
        let m = make_mapping(&frame((100.0, 400.0)), None).unwrap();
        assert_eq!(m.sx, 40.0);
        assert!(m.world_to_pixel((0.0, 1.0)).1 < m.world_to_pixel((0.0, 0.0)).1);
    }
}
