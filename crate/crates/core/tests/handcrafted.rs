mod common;

use common::{blob, coarse_gray, full, naive_lbp, noise};
use wastebench::handcrafted::*;
use wastebench::raster::rgb_to_hsv;
use wastebench::segmentation::Mask;
use wastebench::ImageBuffer;

#[test]
fn color_basic_constant_image() {
    let img = ImageBuffer::filled(20, 20, [10, 200, 90]);
    let b = extract_color_basic(&img, &full(&img)).unwrap();
    let hsv = rgb_to_hsv([10, 200, 90]);
    for c in 0..3 {
        assert_eq!(&b.values[c * 5..c * 5 + 5], &[hsv[c] as f64, 0.0, 0.0, 0.0, 0.0]);
    }
}

#[test]
fn color_basic_two_values_has_one_bit() {
    let img = ImageBuffer::from_fn(10, 10, |x, _| if x % 2 == 0 { [0, 0, 0] } else { [255, 255, 255] });
    let b = extract_color_basic(&img, &full(&img)).unwrap();
    assert!((b.values[14] - 1.0).abs() < 1e-12);
    assert_eq!(b.values[9], 0.0);
}

#[test]
fn color_basic_matches_naive_moments() {
    let img = noise(400, 400, 7);
    let b = extract_color_basic(&img, &full(&img)).unwrap();
    for c in 0..3 {
        let vals: Vec<f64> = img.pixels().map(|p| rgb_to_hsv(p)[c] as f64).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((b.values[c * 5] - mean).abs() < 1e-9);
        assert!((b.values[c * 5 + 1] - var.sqrt()).abs() < 1e-9);
        let skew = vals.iter().map(|v| ((v - mean) / var.sqrt()).powi(3)).sum::<f64>() / n;
        let kurt = vals.iter().map(|v| ((v - mean) / var.sqrt()).powi(4)).sum::<f64>() / n;
        assert!((b.values[c * 5 + 2] - skew).abs() < 1e-9);
        assert!((b.values[c * 5 + 3] - kurt).abs() < 1e-9);
    }
}

#[test]
fn color_basic_needs_two_pixels() {
    let img = ImageBuffer::filled(5, 5, [1, 2, 3]);
    let m = Mask::from_fn(5, 5, |x, y| x == 2 && y == 2);
    assert!(matches!(extract_color_basic(&img, &m), Err(wastebench::Error::DegenerateInput(_))));
}

#[test]
fn color_hist_matches_brute_force() {
    for seed in 0..3 {
        let img = noise(64, 64, seed);
        let mask = Mask::from_fn(64, 64, |x, y| (x * 7 + y * 3) % 5 != 0);
        let b = extract_color_hist(&img, &mask).unwrap();
        let mut hsv = vec![0.0; 512];
        let mut bgr = vec![0.0; 512];
        let mut n = 0.0;
        for y in 0..64 {
            for x in 0..64 {
                if !mask.get(x, y) {
                    continue;
                }
                let p = img.pixel(x, y);
                let q = rgb_to_hsv(p);
                let hb = ((q[0] as f64 / 180.0 * 8.0).floor() as usize).min(7);
                hsv[hb * 64 + (q[1] as usize >> 5) * 8 + (q[2] as usize >> 5)] += 1.0;
                bgr[(p[2] as usize >> 5) * 64 + (p[1] as usize >> 5) * 8 + (p[0] as usize >> 5)] += 1.0;
                n += 1.0;
            }
        }
        for i in 0..512 {
            assert!((b.values[i] - hsv[i] / n).abs() < 1e-12);
            assert!((b.values[512 + i] - bgr[i] / n).abs() < 1e-12);
        }
        assert!((b.values[..512].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((b.values[512..].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn color_hist_constant_has_single_bins() {
    let img = ImageBuffer::filled(9, 9, [40, 80, 160]);
    let b = extract_color_hist(&img, &full(&img)).unwrap();
    assert_eq!(b.values[..512].iter().filter(|&&v| v != 0.0).collect::<Vec<_>>(), vec![&1.0]);
    assert_eq!(b.values[512..].iter().filter(|&&v| v != 0.0).collect::<Vec<_>>(), vec![&1.0]);
}

#[test]
fn contour_rectangle_disc_and_point() {
    let img = ImageBuffer::filled(160, 120, [255, 255, 255]);
    let rect = Mask::from_fn(160, 120, |x, y| (20..120).contains(&x) && (30..80).contains(&y));
    let b = extract_contour(&img, &rect).unwrap();
    assert_eq!(b.values, vec![5000.0, 296.0, 2.0, 1.0, 1.0]);

    let img = ImageBuffer::filled(200, 200, [255, 255, 255]);
    let disc = Mask::from_fn(200, 200, |x, y| (x as f64 - 99.5).powi(2) + (y as f64 - 99.5).powi(2) <= 2500.0);
    let b = extract_contour(&img, &disc).unwrap();
    // exact hull of pixel corners, computed independently
    let hull = oracle_hull_area(&disc);
    assert!((b.values[4] - disc.count() as f64 / hull).abs() < 1e-12);
    assert!((0.98..=1.0).contains(&b.values[4]), "{}", b.values[4]);

    let point = Mask::from_fn(200, 200, |x, y| x == 7 && y == 9);
    let b = extract_contour(&img, &point).unwrap();
    assert_eq!(b.values, vec![1.0, 0.0, 1.0, 1.0, 1.0]);
    assert!(extract_contour(&img, &Mask::new(200, 200)).is_err());
}

fn oracle_hull_area(m: &Mask) -> f64 {
    // gift wrapping over every corner of every pixel
    let mut pts = Vec::new();
    for y in 0..m.height() as i64 {
        for x in 0..m.width() as i64 {
            if m.get(x as u32, y as u32) {
                pts.extend([(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]);
            }
        }
    }
    pts.sort();
    pts.dedup();
    let start = pts[0];
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut cand = if pts[0] == cur { pts[1] } else { pts[0] };
        for &p in &pts {
            let cr = (cand.0 - cur.0) * (p.1 - cur.1) - (cand.1 - cur.1) * (p.0 - cur.0);
            let farther = (p.0 - cur.0).pow(2) + (p.1 - cur.1).pow(2) > (cand.0 - cur.0).pow(2) + (cand.1 - cur.1).pow(2);
            if cr < 0 || (cr == 0 && farther) {
                cand = p;
            }
        }
        if cand == start {
            break;
        }
        hull.push(cand);
        cur = cand;
    }
    let n = hull.len();
    let s: i64 = (0..n).map(|i| hull[i].0 * hull[(i + 1) % n].1 - hull[(i + 1) % n].0 * hull[i].1).sum();
    s.abs() as f64 / 2.0
}

#[test]
fn perimeter_of_diagonal_line_and_square() {
    let diag = Mask::from_fn(10, 10, |x, y| x == y && x < 4);
    assert!((trace_perimeter(&diag) - 6.0 * 2f64.sqrt()).abs() < 1e-12);
    let sq = Mask::from_fn(10, 10, |x, y| (2..5).contains(&x) && (2..5).contains(&y));
    assert_eq!(trace_perimeter(&sq), 8.0);
    let ell = Mask::from_fn(10, 10, |x, y| (x == 1 && (1..4).contains(&y)) || (y == 3 && (1..4).contains(&x)));
    // the inner corner is cut diagonally on the way back
    assert!((trace_perimeter(&ell) - (6.0 + 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn hu_invariances() {
    let (a, ma) = blob(200, 160, 90.0, 80.0, 1.0, 0);
    let (b, mb) = blob(200, 160, 110.0, 80.0, 1.0, 0);
    let ha = extract_hu(&a, &ma).unwrap().values;
    let hb = extract_hu(&b, &mb).unwrap().values;
    assert_eq!(ha, hb);
    let r = a.rotate90();
    let mr = Mask::from_fn(r.width(), r.height(), |x, y| r.pixel(x, y) != [0, 0, 0]);
    let hr = extract_hu(&r, &mr).unwrap().values;
    for (x, y) in ha.iter().zip(&hr) {
        assert!((x - y).abs() < 1e-3, "{ha:?} {hr:?}");
    }
    let (s, ms) = blob(400, 320, 180.0, 160.0, 2.0, 0);
    let hs = extract_hu(&s, &ms).unwrap().values;
    for (x, y) in ha.iter().zip(&hs) {
        assert!((x - y).abs() < 1e-2, "{ha:?} {hs:?}");
    }
    let black = ImageBuffer::filled(10, 10, [0, 0, 0]);
    assert!(extract_hu(&black, &full(&black)).is_err());
}

#[test]
fn hu_matches_reference_for_known_shape() {
    // a filled 2x1 block of unit intensity has eta20 = 0.125 after normalization
    let values = vec![1.0, 1.0, 0.0, 0.0];
    let hu = hu_moments(2, &values).unwrap();
    // mu20 = 0.5, mu02 = 0, m00 = 2 -> eta20 = 0.5 / 4
    assert!((hu[0] - 0.125).abs() < 1e-15);
    assert!((hu[1] - 0.015625).abs() < 1e-15);
}

#[test]
fn glcm_constant_image() {
    let img = ImageBuffer::filled(12, 12, [77, 77, 77]);
    let b = extract_glcm(&img, &full(&img)).unwrap();
    for a in 0..4 {
        assert_eq!(&b.values[a * 5..a * 5 + 5], &[0.0, 0.0, 1.0, 1.0, 0.0]);
    }
}

#[test]
fn glcm_vertical_stripes() {
    let img = ImageBuffer::from_fn(16, 16, |x, _| if x % 2 == 0 { [0, 0, 0] } else { [255, 255, 255] });
    let b = extract_glcm(&img, &full(&img)).unwrap();
    assert!((b.values[0] - 961.0).abs() < 1e-9);
    assert_eq!(b.values[10], 0.0);
    assert!((b.values[5] - 961.0).abs() < 1e-9);
}

#[test]
fn glcm_matches_pair_enumeration() {
    for seed in 0..3 {
        let img = noise(64, 64, 100 + seed);
        let mask = Mask::from_fn(64, 64, |x, y| (x + 2 * y) % 7 != 0);
        let levels: Vec<u8> = img.gray_u8().iter().map(|g| g >> 3).collect();
        let b = extract_glcm(&img, &mask).unwrap();
        for (a, off) in [(1i64, 0i64), (1, -1), (0, -1), (-1, -1)].iter().enumerate() {
            let m = glcm_matrix(&levels, &mask, *off).unwrap();
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for i in 0..32 {
                for j in 0..32 {
                    assert_eq!(m[i * 32 + j], m[j * 32 + i]);
                }
            }
            let mut pairs = Vec::new();
            for y in 0..64i64 {
                for x in 0..64i64 {
                    let (nx, ny) = (x + off.0, y + off.1);
                    if !(0..64).contains(&nx) || !(0..64).contains(&ny) {
                        continue;
                    }
                    if mask.get(x as u32, y as u32) && mask.get(nx as u32, ny as u32) {
                        let (i, j) = (levels[(y * 64 + x) as usize] as f64, levels[(ny * 64 + nx) as usize] as f64);
                        pairs.push((i, j));
                        pairs.push((j, i));
                    }
                }
            }
            let n = pairs.len() as f64;
            let contrast = pairs.iter().map(|(i, j)| (i - j).powi(2)).sum::<f64>() / n;
            let homog = pairs.iter().map(|(i, j)| 1.0 / (1.0 + (i - j).powi(2))).sum::<f64>() / n;
            let mi = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let si = (pairs.iter().map(|p| (p.0 - mi).powi(2)).sum::<f64>() / n).sqrt();
            let corr = pairs.iter().map(|(i, j)| (i - mi) * (j - mi)).sum::<f64>() / n / (si * si);
            assert!((b.values[a * 5] - contrast).abs() < 1e-9);
            assert!((b.values[a * 5 + 2] - homog).abs() < 1e-9);
            assert!((b.values[a * 5 + 4] - corr).abs() < 1e-9);
        }
    }
}

#[test]
fn lbp_matches_naive_enumeration() {
    for seed in 0..3 {
        let img = coarse_gray(64, 64, seed);
        let mask = Mask::from_fn(64, 64, |x, y| (x / 8 + y / 8) % 3 != 0);
        let b = extract_lbp(&img, &mask).unwrap();
        let (counts, n) = naive_lbp(&img, &mask);
        let expected: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert_eq!(b.values, expected);
    }
}

#[test]
fn lbp_constant_is_all_ones_pattern() {
    let img = ImageBuffer::filled(10, 10, [50, 60, 70]);
    let b = extract_lbp(&img, &full(&img)).unwrap();
    let mut expected = vec![0.0; 10];
    expected[8] = 1.0;
    assert_eq!(b.values, expected);
    let tiny = ImageBuffer::filled(2, 2, [0, 0, 0]);
    assert!(extract_lbp(&tiny, &full(&tiny)).is_err());
}

#[test]
fn orb_constant_and_checkerboard() {
    let flat = ImageBuffer::filled(80, 80, [128, 128, 128]);
    let b = extract_orb(&flat, &full(&flat)).unwrap();
    assert!(b.flagged && b.values == vec![0.0; 32]);
    let board = ImageBuffer::from_fn(120, 120, |x, y| {
        if (30..90).contains(&x) && (30..90).contains(&y) {
            if ((x - 30) / 15 + (y - 30) / 15) % 2 == 0 { [255, 255, 255] } else { [0, 0, 0] }
        } else {
            [128, 128, 128]
        }
    });
    for img in [board.clone(), board.hflip()] {
        let kps = orb_keypoints(&img.gray_u8(), 120, 120, &full(&img));
        assert!(!kps.is_empty());
        let b = extract_orb(&img, &full(&img)).unwrap();
        assert!(!b.flagged);
        assert_eq!(b.dim(), 32);
        assert!(b.values.iter().all(|v| (0.0..=255.0).contains(v)));
    }
}

#[test]
fn sift_constant_is_flagged() {
    let flat = ImageBuffer::filled(64, 64, [90, 90, 90]);
    let b = extract_sift(&flat, &full(&flat)).unwrap();
    assert!(b.flagged);
    assert_eq!(b.values, vec![0.0; 128]);
}

#[test]
fn sift_descriptors_survive_quarter_turn() {
    let img = ImageBuffer::from_fn(129, 129, |x, y| {
        if (x as f64 - 52.0).powi(2) + (y as f64 - 76.0).powi(2) <= 144.0 { [255, 255, 255] } else { [0, 0, 0] }
    });
    let rot = img.rotate90();
    let gray = |i: &ImageBuffer| i.gray().iter().map(|g| g / 255.0).collect::<Vec<_>>();
    let a = sift_descriptors(&gray(&img), 129, 129, &full(&img));
    let b = sift_descriptors(&gray(&rot), 129, 129, &full(&rot));
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (_, da) in &a {
        let best = b
            .iter()
            .map(|(_, db)| da.iter().zip(db).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3, "{best}");
    }
    let ba = extract_sift(&img, &full(&img)).unwrap();
    assert_eq!(ba.dim(), 128);
    assert!(!ba.flagged);
}

#[test]
fn gist_constant_and_stripes() {
    let flat = ImageBuffer::filled(40, 36, [200, 10, 10]);
    let b = extract_gist(&flat, &full(&flat)).unwrap();
    assert_eq!(b.dim(), 64);
    assert!(b.values.iter().all(|v| v.abs() < 1e-6), "{:?}", b.values);
    let stripes = ImageBuffer::from_fn(64, 64, |x, _| if (x / 4) % 2 == 0 { [255, 255, 255] } else { [0, 0, 0] });
    let b = extract_gist(&stripes, &full(&stripes)).unwrap();
    let energy = |o: usize| b.values[o * 16..(o + 1) * 16].iter().sum::<f64>();
    assert!(energy(0) > energy(2));
}

#[test]
fn gist_matches_direct_convolution() {
    let img = noise(37, 29, 5);
    let b = extract_gist(&img, &full(&img)).unwrap();
    let (w, h) = (37i64, 29i64);
    let gray: Vec<f64> = img.gray().iter().map(|g| g / 255.0).collect();
    let at = |x: i64, y: i64| gray[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    for (o, theta) in [0.0, 45.0, 90.0, 135.0].iter().enumerate() {
        let k = gabor_kernel(*theta);
        let half = (k.side as i64 - 1) / 2;
        let mut cells = vec![0.0; 16];
        let mut counts = vec![0.0; 16];
        for y in 0..h {
            for x in 0..w {
                let (mut re, mut im) = (0.0, 0.0);
                for v in -half..=half {
                    for u in -half..=half {
                        let t = k.taps[((v + half) * k.side as i64 + u + half) as usize];
                        let p = at(x - u, y - v);
                        re += t.re * p;
                        im += t.im * p;
                    }
                }
                let cell = ((y * 4 / h) * 4 + x * 4 / w) as usize;
                cells[cell] += (re * re + im * im).sqrt();
                counts[cell] += 1.0;
            }
        }
        for c in 0..16 {
            assert!((b.values[o * 16 + c] - cells[c] / counts[c]).abs() < 1e-9);
        }
    }
}

#[test]
fn extract_all_is_deterministic_and_complete() {
    let (img, mask) = blob(120, 100, 60.0, 50.0, 1.0, 0);
    let a = extract_all(&img, &mask).unwrap();
    let b = extract_all(&img, &mask).unwrap();
    assert_eq!(a.flat.len(), 1305);
    assert_eq!(a, b);
    assert!(a.flat.iter().all(|v| v.is_finite()));
    let dark = ImageBuffer::filled(30, 30, [0, 0, 0]);
    let empty = Mask::new(30, 30);
    let v = extract_all(&dark, &empty).unwrap();
    assert_eq!(v.flat.len(), 1305);
    assert!(v.flagged().contains(&BlockKind::ColorBasic));
}
