//! Static SVG rendering of a 2-D instance and an iterate trajectory:
//! every ellipse outline, the unit circle they all contain, and the
//! iterate polyline, in problem coordinates (y axis flipped for screen).

use polyproj_core::instance::Instance;
use polyproj_core::linalg::Vector;
use polyproj_core::sets::Ellipsoid;

const BOUNDARY_SAMPLES: usize = 256;

/// Boundary polygon of a 2-D ellipsoid via the closed-form
/// eigendecomposition of its 2x2 shape matrix.
fn ellipse_boundary(set: &Ellipsoid) -> Vec<(f64, f64)> {
    let q = set.shape();
    let (a, b, c) = (q.get(0, 0), q.get(0, 1), q.get(1, 1));
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = 0.5 * (a + c) + half_gap;
    let l2 = 0.5 * (a + c) - half_gap;
    let (r1, r2) = (set.radius() / l1.sqrt(), set.radius() / l2.sqrt());
    let (u1, u2) = ((theta.cos(), theta.sin()), (-theta.sin(), theta.cos()));
    let (cx, cy) = (set.center()[0], set.center()[1]);
    (0..BOUNDARY_SAMPLES)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / BOUNDARY_SAMPLES as f64;
            let (s1, s2) = (r1 * t.cos(), r2 * t.sin());
            (cx + s1 * u1.0 + s2 * u2.0, cy + s1 * u1.1 + s2 * u2.1)
        })
        .collect()
}

pub fn render(inst: &Instance, iterates: &[Vector]) -> String {
    assert_eq!(inst.n, 2, "render needs a 2-D instance");

    let boundaries: Vec<Vec<(f64, f64)>> = inst.sets.iter().map(ellipse_boundary).collect();
    let mut min = (-1.0_f64, -1.0_f64); // unit circle is always shown
    let mut max = (1.0_f64, 1.0_f64);
    let mut grow = |p: (f64, f64)| {
        min.0 = min.0.min(p.0);
        min.1 = min.1.min(p.1);
        max.0 = max.0.max(p.0);
        max.1 = max.1.max(p.1);
    };
    for b in &boundaries {
        for &p in b {
            grow(p);
        }
    }
    for x in iterates {
        grow((x[0], x[1]));
    }

    let pad = 0.08 * (max.0 - min.0).max(max.1 - min.1);
    let minx = min.0 - pad;
    let (w, h) = (max.0 - min.0 + 2.0 * pad, max.1 - min.1 + 2.0 * pad);
    // scale(1,-1) maps problem y to screen -y, so the box top is -max.1
    let flipped_top = -max.1 - pad;
    let sw = w.max(h) / 400.0;
    let width = 720.0;
    let height = (width * h / w).round();

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"{minx} {flipped_top} {w} {h}\">\n"
    ));
    out.push_str(&format!(
        "<style>\n\
         .ellipse {{ fill: none; stroke: #31629d; stroke-width: {sw}; }}\n\
         .unit-ball {{ fill: none; stroke: #8a8a8a; stroke-width: {sw}; stroke-dasharray: {dash}; }}\n\
         .iterates {{ fill: none; stroke: #c23b22; stroke-width: {sw}; }}\n\
         .start {{ fill: #c23b22; }}\n\
         .end {{ fill: #1a7a3a; }}\n\
         </style>\n",
        dash = 3.0 * sw
    ));
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    out.push_str("<circle class=\"unit-ball\" cx=\"0\" cy=\"0\" r=\"1\"/>\n");

    for b in &boundaries {
        let mut d = String::new();
        for (k, &(x, y)) in b.iter().enumerate() {
            d.push_str(if k == 0 { "M " } else { " L " });
            d.push_str(&format!("{x} {y}"));
        }
        d.push_str(" Z");
        out.push_str(&format!("<path class=\"ellipse\" d=\"{d}\"/>\n"));
    }

    if !iterates.is_empty() {
        let points: Vec<String> = iterates.iter().map(|x| format!("{},{}", x[0], x[1])).collect();
        out.push_str(&format!(
            "<polyline class=\"iterates\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let first = iterates.first().unwrap();
        let last = iterates.last().unwrap();
        let r = 2.5 * sw;
        out.push_str(&format!(
            "<circle class=\"start\" cx=\"{}\" cy=\"{}\" r=\"{r}\"/>\n",
            first[0], first[1]
        ));
        out.push_str(&format!(
            "<circle class=\"end\" cx=\"{}\" cy=\"{}\" r=\"{r}\"/>\n",
            last[0], last[1]
        ));
    }

    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyproj_core::instance::generate;
    use polyproj_core::linalg::SpdMatrix;

    #[test]
    fn boundary_samples_lie_on_the_boundary() {
        let q = SpdMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = Ellipsoid::new(Vector::from_slice(&[0.5, -1.5]), q, 2.0).unwrap();
        for (x, y) in ellipse_boundary(&e) {
            let p = Vector::from_slice(&[x, y]);
            let g = e.gauge(&p).unwrap().value;
            assert!(g.abs() <= 1e-9 * e.radius() * e.radius(), "gauge {g}");
        }
    }

    #[test]
    fn render_emits_one_path_per_set_and_the_trajectory() {
        let inst = generate(3, 2, 11).unwrap();
        let path = vec![inst.x0.clone(), Vector::from_slice(&[0.0, 0.0])];
        let drawing = render(&inst, &path);
        assert_eq!(drawing.matches("class=\"ellipse\"").count(), 3);
        assert_eq!(drawing.matches("<polyline").count(), 1);
        assert!(drawing.contains("class=\"unit-ball\""));
        assert!(drawing.contains("</svg>"));
    }
}
