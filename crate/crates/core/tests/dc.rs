use etcident::cipher::{negative_positive, Dihedral};
use etcident::jpeg::{block_level_sum, extract_dc_luma, DC_MAX, DC_MIN};
use etcident::PixelImage;
use proptest::prelude::*;

/// Direct double sum over the block with floating-point BT.601 luma.
fn oracle_dc(rgb: &[u8], width: usize, bx: usize, by: usize) -> i32 {
    let mut sum = 0.0f64;
    for y in 0..8 {
        for x in 0..8 {
            let i = ((by * 8 + y) * width + bx * 8 + x) * 3;
            let (r, g, b) = (rgb[i] as f64, rgb[i + 1] as f64, rgb[i + 2] as f64);
            // integer arithmetic avoids 0.299 * r landing a hair under .5
            let luma = ((299.0 * r + 587.0 * g + 114.0 * b) / 1000.0 + 0.5).floor();
            sum += luma - 128.0;
        }
    }
    (sum / 8.0).trunc() as i32
}

fn rgb_image() -> impl Strategy<Value = PixelImage> {
    (1usize..5, 1usize..5).prop_flat_map(|(gw, gh)| {
        proptest::collection::vec(any::<u8>(), gw * gh * 64 * 3)
            .prop_map(move |s| PixelImage::new(gw * 8, gh * 8, 3, s).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dc_matches_the_double_sum(img in rgb_image()) {
        let dc = extract_dc_luma(&img).unwrap();
        let gw = img.width() / 8;
        prop_assert_eq!(dc.len(), img.block_count());
        for (m, &v) in dc.values().iter().enumerate() {
            prop_assert_eq!(v, oracle_dc(img.samples(), img.width(), m % gw, m / gw));
            prop_assert!((DC_MIN..=DC_MAX).contains(&v));
        }
    }

    #[test]
    fn dc_is_dihedral_invariant(block in proptest::collection::vec(any::<u8>(), 64)) {
        let img = PixelImage::new(8, 8, 1, block.clone()).unwrap();
        let dc = extract_dc_luma(&img).unwrap().values()[0];
        for t in Dihedral::all() {
            let mut b = block.clone();
            t.apply(&mut b, 1);
            let img = PixelImage::new(8, 8, 1, b).unwrap();
            prop_assert_eq!(extract_dc_luma(&img).unwrap().values()[0], dc);
        }
    }

    #[test]
    fn negpos_shifts_the_level_sum(block in proptest::array::uniform32(any::<u8>()), tail in proptest::array::uniform32(any::<u8>())) {
        let mut full = [0u8; 64];
        full[..32].copy_from_slice(&block);
        full[32..].copy_from_slice(&tail);
        let s = block_level_sum(&full);
        let mut neg = full;
        negative_positive(&mut neg);
        // 8 * (-DC - 8) before rounding
        prop_assert_eq!(block_level_sum(&neg), -s - 64);
        let dc = s / 8;
        let dc_neg = block_level_sum(&neg) / 8;
        prop_assert!((dc_neg - (-dc - 8)).abs() <= 1);
        if s % 8 == 0 {
            prop_assert_eq!(dc_neg, -dc - 8);
        }
    }
}

#[test]
fn range_ends() {
    for (v, dc) in [(0u8, -1024), (255, 1016), (128, 0), (127, -8)] {
        let img = PixelImage::filled(16, 8, 3, v).unwrap();
        assert_eq!(extract_dc_luma(&img).unwrap().values(), &[dc, dc]);
    }
}

#[test]
fn truncation_toward_zero() {
    // level sum -3 and +3 both give DC 0
    let mut s = vec![128u8; 64];
    s[0] = 125;
    assert_eq!(extract_dc_luma(&PixelImage::new(8, 8, 1, s.clone()).unwrap()).unwrap().values(), &[0]);
    s[0] = 131;
    assert_eq!(extract_dc_luma(&PixelImage::new(8, 8, 1, s).unwrap()).unwrap().values(), &[0]);
    let s = vec![127u8; 63].into_iter().chain([128]).collect();
    // level sum -63 -> -7.875 -> -7
    assert_eq!(extract_dc_luma(&PixelImage::new(8, 8, 1, s).unwrap()).unwrap().values(), &[-7]);
}
