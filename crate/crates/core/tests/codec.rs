//! The codec checked against an independent decoder (zune-jpeg) and an
//! independent encoder (the `image` crate).

use std::io::Cursor;

use etcident::bench::synthetic_scene;
use etcident::jpeg::{decode_jpeg, decode_jpeg_components, encode_jpeg, QualityFactor};
use etcident::PixelImage;
use zune_jpeg::zune_core::bytestream::ZCursor;
use zune_jpeg::zune_core::colorspace::ColorSpace;
use zune_jpeg::zune_core::options::DecoderOptions;
use zune_jpeg::JpegDecoder;

fn reference_decode(bytes: &[u8], channels: usize) -> Vec<u8> {
    let cs = if channels == 1 { ColorSpace::Luma } else { ColorSpace::RGB };
    let opts = DecoderOptions::default().jpeg_set_out_colorspace(cs);
    JpegDecoder::new_with_options(ZCursor::new(bytes), opts)
        .decode()
        .expect("reference decoder accepts the stream")
}

fn max_abs_diff(a: &[u8], b: &[u8]) -> u8 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0)
}

fn mae(a: &[u8], b: &[u8]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y) as f64).sum::<f64>() / a.len() as f64
}

fn gray(img: &PixelImage) -> PixelImage {
    let s = img
        .samples()
        .chunks_exact(3)
        .map(|p| etcident::jpeg::luma(p[0], p[1], p[2]))
        .collect();
    PixelImage::new(img.width(), img.height(), 1, s).unwrap()
}

fn test_images() -> Vec<PixelImage> {
    vec![
        synthetic_scene(640, 480, 1).unwrap(),
        synthetic_scene(200, 136, 2).unwrap(),
        synthetic_scene(93, 61, 3).unwrap(),
    ]
}

#[test]
fn grayscale_decode_matches_reference_within_one() {
    for img in test_images() {
        let img = gray(&img);
        for qf in [50, 75, 95] {
            let bytes = encode_jpeg(&img, QualityFactor::new(qf).unwrap());
            let ours = decode_jpeg(&bytes).unwrap();
            let theirs = reference_decode(&bytes, 1);
            let diff = max_abs_diff(ours.samples(), &theirs);
            assert!(diff <= 1, "{}x{} qf {qf}: max diff {diff}", img.width(), img.height());
        }
    }
}

#[test]
fn color_components_match_reference_within_one() {
    for img in test_images() {
        for qf in [75, 95] {
            let bytes = encode_jpeg(&img, QualityFactor::new(qf).unwrap());
            let ours = decode_jpeg_components(&bytes).unwrap();
            let opts = DecoderOptions::default().jpeg_set_out_colorspace(ColorSpace::YCbCr);
            let theirs = JpegDecoder::new_with_options(ZCursor::new(&bytes[..]), opts).decode().unwrap();
            let diff = max_abs_diff(ours.samples(), &theirs);
            assert!(diff <= 1, "{}x{} qf {qf}: max diff {diff}", img.width(), img.height());
        }
    }
}

#[test]
fn color_output_matches_reference_after_conversion() {
    // A +-1 chroma difference becomes up to 1 + 1.772 + rounding in B.
    for img in test_images() {
        let bytes = encode_jpeg(&img, QualityFactor::new(85).unwrap());
        let ours = decode_jpeg(&bytes).unwrap();
        let theirs = reference_decode(&bytes, 3);
        let diff = max_abs_diff(ours.samples(), &theirs);
        assert!(diff <= 3, "max diff {diff}");
        assert!(mae(ours.samples(), &theirs) < 0.1);
    }
}

#[test]
fn foreign_encoder_output_decodes_within_one() {
    for img in test_images() {
        let img = gray(&img);
        let mut bytes = Vec::new();
        let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(Cursor::new(&mut bytes), 85);
        image::ImageEncoder::write_image(
            enc,
            img.samples(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
        )
        .unwrap();
        let ours = decode_jpeg(&bytes).unwrap();
        assert_eq!((ours.width(), ours.height(), ours.channels()), (img.width(), img.height(), 1));
        let diff = max_abs_diff(ours.samples(), &reference_decode(&bytes, 1));
        assert!(diff <= 1, "max diff {diff}");
    }
}

#[test]
fn qf95_round_trip_is_close_but_lossy() {
    for img in test_images() {
        let bytes = encode_jpeg(&img, QualityFactor::new(95).unwrap());
        let ours = decode_jpeg(&bytes).unwrap();
        let theirs = reference_decode(&bytes, 3);
        for out in [ours.samples(), &theirs[..]] {
            let e = mae(img.samples(), out);
            assert!(e > 0.0 && e < 2.5, "mae {e}");
        }
    }
}

#[test]
fn lower_quality_means_smaller_files() {
    let img = &test_images()[0];
    let sizes: Vec<usize> = [95, 85, 75, 50, 10]
        .iter()
        .map(|&q| encode_jpeg(img, QualityFactor::new(q).unwrap()).len())
        .collect();
    assert!(sizes.windows(2).all(|w| w[0] > w[1]), "{sizes:?}");
}
