//! Baseline sequential JPEG decoder (SOF0/SOF1, Huffman, 8-bit).
//!
//! Handles grayscale and non-subsampled three-component images, with or
//! without restart intervals. Progressive, lossless, hierarchical and
//! arithmetic-coded streams are rejected.

use super::dct;
use super::tables::ZIGZAG;
use crate::error::{Error, Result};
use crate::image::PixelImage;

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedJpeg(msg.into())
}

const LOOKAHEAD: u32 = 9;

struct HuffmanTable {
    /// Indexed by the next `LOOKAHEAD` bits: (code length, symbol), length 0 if longer.
    fast: Vec<(u8, u8)>,
    max_code: [i32; 18],
    val_ptr: [i32; 17],
    min_code: [i32; 17],
    values: Vec<u8>,
}

impl HuffmanTable {
    fn new(bits: &[u8; 16], values: Vec<u8>) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(malformed("Huffman table size mismatch"));
        }
        let mut max_code = [-1i32; 18];
        let mut val_ptr = [0i32; 17];
        let mut min_code = [0i32; 17];
        let mut fast = vec![(0u8, 0u8); 1 << LOOKAHEAD];
        let mut code: i32 = 0;
        let mut k = 0usize;
        for len in 1..=16usize {
            let count = bits[len - 1] as i32;
            if count > 0 {
                val_ptr[len] = k as i32;
                min_code[len] = code;
                for _ in 0..count {
                    if len as u32 <= LOOKAHEAD {
                        let shift = LOOKAHEAD - len as u32;
                        let base = (code as usize) << shift;
                        for slot in fast.iter_mut().skip(base).take(1 << shift) {
                            *slot = (len as u8, values[k]);
                        }
                    }
                    code += 1;
                    k += 1;
                }
                max_code[len] = code - 1;
                if code > (1 << len) {
                    return Err(malformed("over-subscribed Huffman table"));
                }
            }
            code <<= 1;
        }
        max_code[17] = i32::MAX;
        Ok(Self {
            fast,
            max_code,
            val_ptr,
            min_code,
            values,
        })
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    bits: u32,
    /// A marker was reached; further reads yield zero bits.
    hit_marker: bool,
    phantom_bytes: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self {
            data,
            pos,
            acc: 0,
            bits: 0,
            hit_marker: false,
            phantom_bytes: 0,
        }
    }

    /// True once decoding has consumed bits past the end of the segment.
    fn overrun(&self) -> bool {
        self.phantom_bytes * 8 > self.bits
    }

    fn fill(&mut self) {
        while self.bits <= 56 {
            let mut byte = 0u8;
            if !self.hit_marker {
                match self.data.get(self.pos) {
                    None => self.hit_marker = true,
                    Some(&0xFF) => match self.data.get(self.pos + 1) {
                        Some(0x00) => {
                            byte = 0xFF;
                            self.pos += 2;
                        }
                        _ => self.hit_marker = true,
                    },
                    Some(&b) => {
                        byte = b;
                        self.pos += 1;
                    }
                }
            }
            if self.hit_marker {
                self.phantom_bytes += 1;
            }
            self.acc |= (byte as u64) << (56 - self.bits);
            self.bits += 8;
        }
    }

    fn peek(&mut self, n: u32) -> u32 {
        if self.bits < n {
            self.fill();
        }
        (self.acc >> (64 - n)) as u32
    }

    fn consume(&mut self, n: u32) {
        self.acc <<= n;
        self.bits -= n;
    }

    fn bits(&mut self, n: u32) -> u32 {
        if n == 0 {
            return 0;
        }
        let v = self.peek(n);
        self.consume(n);
        v
    }

    /// Reads `n` bits and sign-extends them per T.81 F.2.2.1.
    fn receive_extend(&mut self, n: u8) -> i32 {
        if n == 0 {
            return 0;
        }
        let v = self.bits(n as u32) as i32;
        if v < (1 << (n - 1)) {
            v - (1 << n) + 1
        } else {
            v
        }
    }

    fn decode(&mut self, table: &HuffmanTable) -> Result<u8> {
        let peek = self.peek(LOOKAHEAD);
        let (len, sym) = table.fast[peek as usize];
        if len > 0 {
            self.consume(len as u32);
            return Ok(sym);
        }
        let word = self.peek(16) as i32;
        for len in (LOOKAHEAD as usize + 1)..=16 {
            let code = word >> (16 - len);
            if code <= table.max_code[len] {
                self.consume(len as u32);
                let idx = table.val_ptr[len] + code - table.min_code[len];
                return table
                    .values
                    .get(idx as usize)
                    .copied()
                    .ok_or_else(|| malformed("bad Huffman code"));
            }
        }
        Err(malformed("bad Huffman code"))
    }

    /// Discards buffered bits and consumes an expected RSTn marker.
    fn restart(&mut self, expected: u8) -> Result<()> {
        self.acc = 0;
        self.bits = 0;
        self.hit_marker = false;
        self.phantom_bytes = 0;
        while self.data.get(self.pos) == Some(&0xFF) && self.data.get(self.pos + 1) == Some(&0xFF)
        {
            self.pos += 1;
        }
        match (self.data.get(self.pos), self.data.get(self.pos + 1)) {
            (Some(0xFF), Some(&m)) if m == 0xD0 + expected => {
                self.pos += 2;
                Ok(())
            }
            _ => Err(malformed("missing restart marker")),
        }
    }
}

#[derive(Clone)]
struct FrameComponent {
    id: u8,
    h: u8,
    v: u8,
    quant: usize,
}

struct Frame {
    width: usize,
    height: usize,
    components: Vec<FrameComponent>,
}

#[derive(Default)]
struct Decoder {
    quant: [Option<[u16; 64]>; 4],
    dc_tables: [Option<HuffmanTable>; 4],
    ac_tables: [Option<HuffmanTable>; 4],
    frame: Option<Frame>,
    restart_interval: usize,
    adobe_transform: Option<u8>,
    jfif: bool,
    planes: Vec<Vec<u8>>,
    decoded_scan: bool,
}

fn be16(data: &[u8], at: usize) -> Result<usize> {
    match data.get(at..at + 2) {
        Some(b) => Ok(u16::from_be_bytes([b[0], b[1]]) as usize),
        None => Err(malformed("truncated stream")),
    }
}

impl Decoder {
    fn read_dqt(&mut self, mut seg: &[u8]) -> Result<()> {
        while !seg.is_empty() {
            let precision = seg[0] >> 4;
            let id = (seg[0] & 0x0F) as usize;
            if id > 3 || precision > 1 {
                return Err(malformed("bad DQT header"));
            }
            let size = if precision == 0 { 64 } else { 128 };
            let body = seg
                .get(1..1 + size)
                .ok_or_else(|| malformed("truncated DQT"))?;
            let mut table = [0u16; 64];
            for k in 0..64 {
                let v = if precision == 0 {
                    body[k] as u16
                } else {
                    u16::from_be_bytes([body[2 * k], body[2 * k + 1]])
                };
                table[ZIGZAG[k]] = v;
            }
            self.quant[id] = Some(table);
            seg = &seg[1 + size..];
        }
        Ok(())
    }

    fn read_dht(&mut self, mut seg: &[u8]) -> Result<()> {
        while !seg.is_empty() {
            if seg.len() < 17 {
                return Err(malformed("truncated DHT"));
            }
            let class = seg[0] >> 4;
            let id = (seg[0] & 0x0F) as usize;
            if class > 1 || id > 3 {
                return Err(malformed("bad DHT header"));
            }
            let mut bits = [0u8; 16];
            bits.copy_from_slice(&seg[1..17]);
            let total: usize = bits.iter().map(|&b| b as usize).sum();
            let values = seg
                .get(17..17 + total)
                .ok_or_else(|| malformed("truncated DHT"))?
                .to_vec();
            let table = HuffmanTable::new(&bits, values)?;
            if class == 0 {
                self.dc_tables[id] = Some(table);
            } else {
                self.ac_tables[id] = Some(table);
            }
            seg = &seg[17 + total..];
        }
        Ok(())
    }

    fn read_sof(&mut self, seg: &[u8]) -> Result<()> {
        if self.frame.is_some() {
            return Err(malformed("multiple frames"));
        }
        if seg.len() < 6 {
            return Err(malformed("truncated SOF"));
        }
        if seg[0] != 8 {
            return Err(Error::UnsupportedJpeg(format!("{}-bit precision", seg[0])));
        }
        let height = u16::from_be_bytes([seg[1], seg[2]]) as usize;
        let width = u16::from_be_bytes([seg[3], seg[4]]) as usize;
        let n = seg[5] as usize;
        if height == 0 {
            return Err(Error::UnsupportedJpeg("DNL-defined height".into()));
        }
        if width == 0 {
            return Err(malformed("zero width"));
        }
        if n != 1 && n != 3 {
            return Err(Error::UnsupportedJpeg(format!("{n} components")));
        }
        if seg.len() < 6 + 3 * n {
            return Err(malformed("truncated SOF"));
        }
        let components: Vec<FrameComponent> = (0..n)
            .map(|i| {
                let c = &seg[6 + 3 * i..9 + 3 * i];
                FrameComponent {
                    id: c[0],
                    h: c[1] >> 4,
                    v: c[1] & 0x0F,
                    quant: (c[2] & 0x03) as usize,
                }
            })
            .collect();
        if n == 3 && components.iter().any(|c| c.h != 1 || c.v != 1) {
            return Err(Error::UnsupportedJpeg(
                "chroma subsampling other than 4:4:4".into(),
            ));
        }
        self.frame = Some(Frame {
            width,
            height,
            components,
        });
        Ok(())
    }

    fn read_scan(&mut self, data: &[u8], header: &[u8], start: usize) -> Result<usize> {
        let frame = self
            .frame
            .as_ref()
            .ok_or_else(|| malformed("scan before frame header"))?;
        if self.decoded_scan {
            return Err(Error::UnsupportedJpeg("multiple scans".into()));
        }
        let ns = *header.first().ok_or_else(|| malformed("empty SOS"))? as usize;
        if ns != frame.components.len() || header.len() < 1 + 2 * ns + 3 {
            return Err(Error::UnsupportedJpeg(
                "scan does not cover every component".into(),
            ));
        }
        let mut order = Vec::with_capacity(ns);
        for i in 0..ns {
            let id = header[1 + 2 * i];
            let tables = header[2 + 2 * i];
            let idx = frame
                .components
                .iter()
                .position(|c| c.id == id)
                .ok_or_else(|| malformed("scan references unknown component"))?;
            order.push((idx, (tables >> 4) as usize, (tables & 0x0F) as usize));
        }
        let (ss, se, ah_al) = (header[1 + 2 * ns], header[2 + 2 * ns], header[3 + 2 * ns]);
        if ss != 0 || se != 63 || ah_al != 0 {
            return Err(malformed("baseline scan must cover 0..63"));
        }

        let bw = frame.width.div_ceil(8);
        let bh = frame.height.div_ceil(8);
        let stride = bw * 8;
        let mut planes = vec![vec![0u8; stride * bh * 8]; ns];
        let mut quant = Vec::with_capacity(ns);
        let mut dc = Vec::with_capacity(ns);
        let mut ac = Vec::with_capacity(ns);
        for &(idx, td, ta) in &order {
            let q = self.quant[frame.components[idx].quant]
                .ok_or_else(|| malformed("missing quantization table"))?;
            quant.push(q);
            dc.push(
                self.dc_tables
                    .get(td)
                    .and_then(|t| t.as_ref())
                    .ok_or_else(|| malformed("missing DC table"))?,
            );
            ac.push(
                self.ac_tables
                    .get(ta)
                    .and_then(|t| t.as_ref())
                    .ok_or_else(|| malformed("missing AC table"))?,
            );
        }

        let mut reader = BitReader::new(data, start);
        let mut preds = vec![0i32; ns];
        let mut coeffs = [0i32; 64];
        let mut block = [0f64; 64];
        let total = bw * bh;
        let mut next_rst = 0u8;
        for mcu in 0..total {
            if self.restart_interval > 0 && mcu > 0 && mcu % self.restart_interval == 0 {
                reader.restart(next_rst)?;
                next_rst = (next_rst + 1) & 7;
                preds.iter_mut().for_each(|p| *p = 0);
            }
            if reader.overrun() {
                return Err(malformed("truncated entropy-coded data"));
            }
            let (bx, by) = (mcu % bw, mcu / bw);
            for s in 0..ns {
                coeffs.fill(0);
                let size = reader.decode(dc[s])?;
                if size > 11 {
                    return Err(malformed("DC magnitude out of range"));
                }
                preds[s] += reader.receive_extend(size);
                coeffs[0] = preds[s];
                let mut k = 1;
                while k < 64 {
                    let rs = reader.decode(ac[s])?;
                    let (run, size) = ((rs >> 4) as usize, rs & 0x0F);
                    if size == 0 {
                        if run == 15 {
                            k += 16;
                            continue;
                        }
                        break;
                    }
                    k += run;
                    if k > 63 {
                        return Err(malformed("AC run past end of block"));
                    }
                    coeffs[ZIGZAG[k]] = reader.receive_extend(size);
                    k += 1;
                }
                for i in 0..64 {
                    block[i] = (coeffs[i] * quant[s][i] as i32) as f64;
                }
                let pixels = dct::inverse(&block);
                let (plane_idx, _, _) = order[s];
                let plane = &mut planes[plane_idx];
                for y in 0..8 {
                    let row = (by * 8 + y) * stride + bx * 8;
                    for x in 0..8 {
                        plane[row + x] = (pixels[y * 8 + x] + 128.0).round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
        if reader.overrun() {
            return Err(malformed("truncated entropy-coded data"));
        }
        self.planes = planes;
        self.decoded_scan = true;

        // Resume marker parsing after the entropy-coded segment.
        let mut pos = reader.pos;
        loop {
            match (data.get(pos), data.get(pos + 1)) {
                (Some(0xFF), Some(0x00)) => pos += 2,
                (Some(0xFF), Some(m)) if (0xD0..=0xD7).contains(m) => pos += 2,
                (Some(0xFF), Some(0xFF)) => pos += 1,
                (Some(0xFF), Some(_)) => return Ok(pos),
                (Some(_), _) => pos += 1,
                (None, _) => return Ok(data.len()),
            }
        }
    }

    fn finish(self, convert: bool) -> Result<PixelImage> {
        let frame = self.frame.ok_or_else(|| malformed("no frame header"))?;
        if !self.decoded_scan {
            return Err(malformed("no scan data"));
        }
        let (w, h) = (frame.width, frame.height);
        let stride = w.div_ceil(8) * 8;
        let n = frame.components.len();
        let mut samples = Vec::with_capacity(w * h * n);
        if n == 1 {
            for y in 0..h {
                samples.extend_from_slice(&self.planes[0][y * stride..y * stride + w]);
            }
            return PixelImage::new(w, h, 1, samples);
        }
        let ids: Vec<u8> = frame.components.iter().map(|c| c.id).collect();
        let is_rgb = !convert
            || match self.adobe_transform {
                Some(t) => t == 0,
                None => !self.jfif && ids == *b"RGB",
            };
        for y in 0..h {
            for x in 0..w {
                let i = y * stride + x;
                let (c0, c1, c2) = (self.planes[0][i], self.planes[1][i], self.planes[2][i]);
                if is_rgb {
                    samples.extend_from_slice(&[c0, c1, c2]);
                } else {
                    samples.extend_from_slice(&ycbcr_to_rgb(c0, c1, c2));
                }
            }
        }
        PixelImage::new(w, h, 3, samples)
    }
}

fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> [u8; 3] {
    let y = y as f64;
    let cb = cb as f64 - 128.0;
    let cr = cr as f64 - 128.0;
    let clamp = |v: f64| v.round().clamp(0.0, 255.0) as u8;
    [
        clamp(y + 1.402 * cr),
        clamp(y - 0.344_136_286 * cb - 0.714_136_286 * cr),
        clamp(y + 1.772 * cb),
    ]
}

/// With `convert` false, three-component streams come back as stored (YCbCr).
pub(super) fn decode(data: &[u8], convert: bool) -> Result<PixelImage> {
    if data.len() < 4 || data[0] != 0xFF || data[1] != 0xD8 {
        return Err(malformed("missing SOI marker"));
    }
    let mut dec = Decoder::default();
    let mut pos = 2;
    loop {
        // skip fill bytes
        while data.get(pos) == Some(&0xFF) && data.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        let marker = match (data.get(pos), data.get(pos + 1)) {
            (Some(0xFF), Some(&m)) => m,
            (None, _) | (Some(_), None) => return Err(malformed("truncated stream: no EOI")),
            _ => return Err(malformed(format!("expected marker at offset {pos}"))),
        };
        pos += 2;
        match marker {
            0xD9 => break,
            0x01 | 0xD0..=0xD7 => continue,
            _ => {}
        }
        let len = be16(data, pos)?;
        if len < 2 {
            return Err(malformed("bad segment length"));
        }
        let seg = data
            .get(pos + 2..pos + len)
            .ok_or_else(|| malformed("truncated segment"))?;
        let after = pos + len;
        match marker {
            0xC0 | 0xC1 => dec.read_sof(seg)?,
            0xC2 | 0xC6 | 0xCA | 0xCE => {
                return Err(Error::UnsupportedJpeg("progressive coding".into()))
            }
            0xC3 | 0xC7 | 0xCB | 0xCF => {
                return Err(Error::UnsupportedJpeg("lossless coding".into()))
            }
            0xC5 => return Err(Error::UnsupportedJpeg("hierarchical coding".into())),
            0xC9 | 0xCC => return Err(Error::UnsupportedJpeg("arithmetic coding".into())),
            0xC4 => dec.read_dht(seg)?,
            0xDB => dec.read_dqt(seg)?,
            0xDD => dec.restart_interval = be16(seg, 0)?,
            0xE0 => dec.jfif |= seg.starts_with(b"JFIF\0"),
            0xEE => {
                if seg.len() >= 12 && seg.starts_with(b"Adobe") {
                    dec.adobe_transform = Some(seg[11]);
                }
            }
            0xDA => {
                pos = dec.read_scan(data, seg, after)?;
                continue;
            }
            _ => {}
        }
        pos = after;
    }
    dec.finish(convert)
}
