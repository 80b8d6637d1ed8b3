use nalgebra::Vector2;

/// Planar reference path parametrised by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vector2<f64>>,
    cumulative: Vec<f64>,
}

/// Closest point on a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub s: f64,
    pub point: Vector2<f64>,
    pub distance: f64,
}

impl Polyline {
    /// Duplicate vertices and interior vertices of straight runs are
    /// dropped, so every remaining interior vertex is a turn. `None` for no
    /// points.
    pub fn new(points: impl IntoIterator<Item = Vector2<f64>>) -> Option<Self> {
        let mut kept: Vec<Vector2<f64>> = Vec::new();
        for p in points {
            if kept.last() == Some(&p) {
                continue;
            }
            if let [.., a, b] = kept[..] {
                let (d1, d2) = (b - a, p - b);
                let straight = d1.perp(&d2).abs() <= 1e-12 * d1.norm() * d2.norm() && d1.dot(&d2) > 0.0;
                if straight {
                    kept.pop();
                }
            }
            kept.push(p);
        }
        if kept.is_empty() {
            return None;
        }
        let mut cumulative = vec![0.0];
        for w in kept.windows(2) {
            cumulative.push(cumulative.last().unwrap() + (w[1] - w[0]).norm());
        }
        Some(Self { points: kept, cumulative })
    }

    /// Straight segment of `length` from `start` along a unit `direction`.
    pub fn line(start: Vector2<f64>, direction: Vector2<f64>, length: f64) -> Self {
        Self::new([start, start + direction * length]).expect("two points")
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn start(&self) -> Vector2<f64> {
        self.points[0]
    }

    pub fn end(&self) -> Vector2<f64> {
        *self.points.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Vector2<f64> {
        if s <= 0.0 {
            return self.start();
        }
        if s >= self.length() {
            return self.end();
        }
        let seg = self.cumulative.partition_point(|&c| c <= s) - 1;
        let span = self.cumulative[seg + 1] - self.cumulative[seg];
        let t = (s - self.cumulative[seg]) / span;
        self.points[seg] + (self.points[seg + 1] - self.points[seg]) * t
    }

    /// Arc length of the first vertex strictly beyond `s`, or the path
    /// length past the last one.
    pub fn next_vertex(&self, s: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c <= s);
        self.cumulative.get(i).copied().unwrap_or(self.length())
    }

    /// Closest point with arc length in `[s_min, s_max]`.
    pub fn project_within(&self, p: Vector2<f64>, s_min: f64, s_max: f64) -> Projection {
        let mut best = Projection { s: s_min.max(0.0), point: self.point_at(s_min), distance: f64::INFINITY };
        best.distance = (p - best.point).norm();
        for seg in 0..self.points.len().saturating_sub(1) {
            let (c0, c1) = (self.cumulative[seg], self.cumulative[seg + 1]);
            if c1 < s_min || c0 > s_max {
                continue;
            }
            let (a, b) = (self.points[seg], self.points[seg + 1]);
            let d = b - a;
            let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            let s = (c0 + t * (c1 - c0)).clamp(s_min, s_max);
            let point = self.point_at(s);
            let distance = (p - point).norm();
            if distance < best.distance {
                best = Projection { s, point, distance };
            }
        }
        best
    }

    /// Closest point on the whole path.
    pub fn project(&self, p: Vector2<f64>) -> Projection {
        self.project_within(p, 0.0, self.length())
    }
}
