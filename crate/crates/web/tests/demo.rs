use etcident::bench::synthetic_scene;
use etcident_web::{compare_rgba, decrypt_rgba, encrypt_rgba, recompress_rgba};

fn scene(w: usize, h: usize, seed: u64) -> Vec<u8> {
    let img = synthetic_scene(w, h, seed).unwrap();
    img.samples()
        .chunks_exact(3)
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect()
}

#[test]
fn encrypt_then_decrypt_restores_the_canvas() {
    let rgba = scene(64, 48, 3);
    let enc = encrypt_rgba(&rgba, 64, 48, 7, 11, 0).unwrap();
    assert_ne!(enc, rgba);
    assert_eq!(decrypt_rgba(&enc, 64, 48, 7, 11, 0).unwrap(), rgba);
    assert_ne!(decrypt_rgba(&enc, 64, 48, 7, 12, 0).unwrap(), rgba);
}

#[test]
fn alpha_is_opaque_after_a_round_trip() {
    let mut rgba = scene(16, 16, 1);
    for px in rgba.chunks_exact_mut(4) {
        px[3] = 10;
    }
    let (out, bytes) = recompress_rgba(&rgba, 16, 16, 90).unwrap();
    assert!(bytes > 0);
    assert!(out.chunks_exact(4).all(|p| p[3] == 255));
}

#[test]
fn rekeyed_recompressed_copy_still_matches() {
    let (w, h) = (160, 120);
    let rgba = scene(w, h, 9);
    let a = encrypt_rgba(&rgba, w, h, 5, 1, 0).unwrap();
    let b = encrypt_rgba(&rgba, w, h, 5, 2, 0).unwrap();
    let (b, _) = recompress_rgba(&b, w, h, 70).unwrap();
    let cmp = compare_rgba(&a, &b, w, h, 0, 150).unwrap();
    assert_eq!(cmp.query.len(), 30);
    assert!(cmp.accepted, "max diff {}", cmp.max_diff);

    let other = encrypt_rgba(&scene(w, h, 10), w, h, 5, 1, 0).unwrap();
    assert!(!compare_rgba(&a, &other, w, h, 0, 150).unwrap().accepted);
}

#[test]
fn bad_buffers_are_reported() {
    assert!(encrypt_rgba(&[0; 12], 2, 2, 1, 1, 0).is_err());
    assert!(encrypt_rgba(&[0; 100], 16, 16, 1, 1, 0).is_err());
    assert!(encrypt_rgba(&[0; 12 * 8 * 4], 12, 8, 1, 1, 0).is_err());
    assert!(recompress_rgba(&scene(8, 8, 0), 8, 8, 0).is_err());
}
