//! Baseline sequential JPEG encoder, 4:4:4, standard Huffman tables.

use super::tables::*;
use super::{dct, QualityFactor, QuantTables};
use crate::image::PixelImage;

struct HuffmanCode {
    code: [u16; 256],
    len: [u8; 256],
}

impl HuffmanCode {
    /// Canonical code assignment (T.81 C.2).
    fn new(bits: &[u8; 16], vals: &[u8]) -> Self {
        let mut table = HuffmanCode {
            code: [0; 256],
            len: [0; 256],
        };
        let mut code: u16 = 0;
        let mut k = 0;
        for (i, &count) in bits.iter().enumerate() {
            for _ in 0..count {
                let sym = vals[k] as usize;
                table.code[sym] = code;
                table.len[sym] = (i + 1) as u8;
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        table
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    filled: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self {
            out,
            acc: 0,
            filled: 0,
        }
    }

    fn put(&mut self, bits: u16, count: u8) {
        debug_assert!(count <= 16);
        if count == 0 {
            return;
        }
        self.acc = (self.acc << count) | (bits as u32 & ((1 << count) - 1));
        self.filled += count as u32;
        while self.filled >= 8 {
            let byte = (self.acc >> (self.filled - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.filled -= 8;
        }
        self.acc &= (1 << self.filled) - 1;
    }

    /// Pads the final partial byte with 1-bits.
    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            let pad = 8 - self.filled as u8;
            self.put((1 << pad) - 1, pad);
        }
        self.out
    }
}

/// Magnitude category and the appended bits for a coefficient (T.81 F.1.2.1).
fn magnitude(value: i32) -> (u8, u16) {
    if value == 0 {
        return (0, 0);
    }
    let size = 32 - value.unsigned_abs().leading_zeros();
    let bits = if value < 0 {
        value - 1 + (1 << size)
    } else {
        value
    };
    (size as u8, bits as u16)
}

struct Component {
    id: u8,
    quant: usize,
    dc: HuffmanCode,
    ac: HuffmanCode,
    pred: i32,
}

fn encode_block(w: &mut BitWriter, comp: &mut Component, coeffs: &[i32; 64]) {
    let diff = coeffs[0] - comp.pred;
    comp.pred = coeffs[0];
    let (size, bits) = magnitude(diff);
    w.put(comp.dc.code[size as usize], comp.dc.len[size as usize]);
    w.put(bits, size);

    let mut run = 0u8;
    for k in 1..64 {
        let c = coeffs[ZIGZAG[k]];
        if c == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            w.put(comp.ac.code[0xF0], comp.ac.len[0xF0]);
            run -= 16;
        }
        let (size, bits) = magnitude(c);
        let sym = ((run << 4) | size) as usize;
        w.put(comp.ac.code[sym], comp.ac.len[sym]);
        w.put(bits, size);
        run = 0;
    }
    if run > 0 {
        w.put(comp.ac.code[0x00], comp.ac.len[0x00]);
    }
}

fn segment(out: &mut Vec<u8>, marker: u8, body: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((body.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(body);
}

fn dht(out: &mut Vec<u8>, class_id: u8, bits: &[u8; 16], vals: &[u8]) {
    let mut body = vec![class_id];
    body.extend_from_slice(bits);
    body.extend_from_slice(vals);
    segment(out, 0xC4, &body);
}

/// Converts the image into level-shifted planes (Y, or Y/Cb/Cr), padded
/// to whole blocks by edge replication.
fn planes(img: &PixelImage, padded_w: usize, padded_h: usize) -> Vec<Vec<f64>> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let src = img.samples();
    let mut planes = vec![vec![0.0; padded_w * padded_h]; ch];
    for y in 0..padded_h {
        let sy = y.min(h - 1);
        for x in 0..padded_w {
            let sx = x.min(w - 1);
            let at = (sy * w + sx) * ch;
            let i = y * padded_w + x;
            if ch == 1 {
                planes[0][i] = src[at] as f64 - 128.0;
            } else {
                let (r, g, b) = (src[at] as f64, src[at + 1] as f64, src[at + 2] as f64);
                planes[0][i] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
                planes[1][i] = -0.168_735_891_6 * r - 0.331_264_108_4 * g + 0.5 * b;
                planes[2][i] = 0.5 * r - 0.418_687_589_2 * g - 0.081_312_410_8 * b;
            }
        }
    }
    planes
}

pub(super) fn encode(img: &PixelImage, qf: QualityFactor) -> Vec<u8> {
    let tables = QuantTables::for_quality(qf);
    let (w, h) = (img.width(), img.height());
    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    let color = img.channels() == 3;

    let mut out = Vec::with_capacity(w * h / 4 + 1024);
    out.extend_from_slice(&[0xFF, 0xD8]);
    segment(
        &mut out,
        0xE0,
        &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0],
    );

    let quant = [tables.luma, tables.chroma];
    let n_tables = if color { 2 } else { 1 };
    for (id, table) in quant.iter().enumerate().take(n_tables) {
        let mut body = vec![id as u8];
        body.extend(ZIGZAG.iter().map(|&i| table[i] as u8));
        segment(&mut out, 0xDB, &body);
    }

    let n_comp = img.channels() as u8;
    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.push(n_comp);
    for c in 0..n_comp {
        sof.extend_from_slice(&[c + 1, 0x11, (c > 0) as u8]);
    }
    segment(&mut out, 0xC0, &sof);

    dht(&mut out, 0x00, &DC_LUMA_BITS, &DC_LUMA_VALS);
    dht(&mut out, 0x10, &AC_LUMA_BITS, &AC_LUMA_VALS);
    if color {
        dht(&mut out, 0x01, &DC_CHROMA_BITS, &DC_CHROMA_VALS);
        dht(&mut out, 0x11, &AC_CHROMA_BITS, &AC_CHROMA_VALS);
    }

    let mut sos = vec![n_comp];
    for c in 0..n_comp {
        let t = (c > 0) as u8;
        sos.extend_from_slice(&[c + 1, (t << 4) | t]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    segment(&mut out, 0xDA, &sos);

    let mut comps: Vec<Component> = (0..n_comp)
        .map(|c| {
            let chroma = c > 0;
            Component {
                id: c + 1,
                quant: chroma as usize,
                dc: if chroma {
                    HuffmanCode::new(&DC_CHROMA_BITS, &DC_CHROMA_VALS)
                } else {
                    HuffmanCode::new(&DC_LUMA_BITS, &DC_LUMA_VALS)
                },
                ac: if chroma {
                    HuffmanCode::new(&AC_CHROMA_BITS, &AC_CHROMA_VALS)
                } else {
                    HuffmanCode::new(&AC_LUMA_BITS, &AC_LUMA_VALS)
                },
                pred: 0,
            }
        })
        .collect();
    debug_assert!(comps.iter().enumerate().all(|(i, c)| c.id as usize == i + 1));

    let planes = planes(img, bw * 8, bh * 8);
    let stride = bw * 8;
    let mut writer = BitWriter::new(out);
    let mut block = [0.0f64; 64];
    let mut quantized = [0i32; 64];
    for by in 0..bh {
        for bx in 0..bw {
            for (comp, plane) in comps.iter_mut().zip(planes.iter()) {
                for y in 0..8 {
                    let row = (by * 8 + y) * stride + bx * 8;
                    block[y * 8..y * 8 + 8].copy_from_slice(&plane[row..row + 8]);
                }
                let coeffs = dct::forward(&block);
                let q = &quant[comp.quant];
                for i in 0..64 {
                    quantized[i] = (coeffs[i] / q[i] as f64).round() as i32;
                }
                encode_block(&mut writer, comp, &quantized);
            }
        }
    }
    let mut out = writer.finish();
    out.extend_from_slice(&[0xFF, 0xD9]);
    out
}
