use crate::error::{Error, Result};

use super::polygon::{BoundingBox, Point2D};

/// Dense binary grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: u32,
    width: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: u32, width: u32) -> Self {
        Self {
            height,
            width,
            bits: vec![false; height as usize * width as usize],
        }
    }

    pub fn from_fn(height: u32, width: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height as usize * width as usize);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self { height, width, bits }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> bool {
        self.bits[row as usize * self.width as usize + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        self.bits[row as usize * self.width as usize + col as usize] = value;
    }

    /// Like [`get`](Self::get) but treats out-of-range coordinates as unset.
    pub fn get_signed(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && row < self.height as i64 && col < self.width as i64 && self.get(row as u32, col as u32)
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Pixel-wise OR. Panics on a dimension mismatch.
    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!((self.height, self.width), (other.height, other.width));
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    pub fn to_rle(&self) -> RleMask {
        RleMask::from_mask(self)
    }
}

/// Column-major run-length mask in the COCO layout: runs alternate
/// background/foreground and always start with a (possibly empty) background
/// run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RleMask {
    height: u32,
    width: u32,
    counts: Vec<u32>,
}

impl RleMask {
    pub fn new(height: u32, width: u32, counts: Vec<u32>) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        let expected = height as u64 * width as u64;
        if total != expected {
            return Err(Error::CorruptRle(format!(
                "counts sum to {total}, expected {height}x{width} = {expected}"
            )));
        }
        Ok(Self { height, width, counts })
    }

    pub fn empty(height: u32, width: u32) -> Self {
        let n = height as u64 * width as u64;
        Self {
            height,
            width,
            counts: if n == 0 { Vec::new() } else { vec![n as u32] },
        }
    }

    /// Builds a mask from per-column foreground intervals `(col, row_start,
    /// row_end)` with `row_end` exclusive. Intervals must be sorted by column
    /// then row, non-overlapping, and inside the grid.
    pub fn from_column_intervals(
        height: u32,
        width: u32,
        intervals: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self> {
        let mut counts = Vec::new();
        let mut pos: u64 = 0;
        let mut zeros: u64 = 0;
        let total = height as u64 * width as u64;
        for (col, r0, r1) in intervals {
            if col >= width || r0 > r1 || r1 > height {
                return Err(Error::invalid_argument(format!(
                    "interval (col {col}, rows {r0}..{r1}) outside {height}x{width} grid"
                )));
            }
            if r0 == r1 {
                continue;
            }
            let start = col as u64 * height as u64 + r0 as u64;
            if start < pos {
                return Err(Error::invalid_argument("column intervals overlap or are unsorted"));
            }
            let len = (r1 - r0) as u64;
            if start == pos && !counts.is_empty() {
                // Adjacent to the previous one-run.
                *counts.last_mut().unwrap() += len as u32;
            } else {
                zeros += start - pos;
                counts.push(zeros as u32);
                counts.push(len as u32);
                zeros = 0;
            }
            pos = start + len;
        }
        if pos < total {
            counts.push((total - pos) as u32);
        }
        Self::new(height, width, counts)
    }

    pub fn from_mask(mask: &BinaryMask) -> Self {
        let (h, w) = (mask.height, mask.width);
        let mut counts = Vec::new();
        let mut current = false;
        let mut run: u32 = 0;
        for c in 0..w {
            for r in 0..h {
                let v = mask.get(r, c);
                if v != current {
                    counts.push(run);
                    run = 0;
                    current = v;
                }
                run += 1;
            }
        }
        if h as u64 * w as u64 > 0 {
            counts.push(run);
        }
        Self {
            height: h,
            width: w,
            counts,
        }
    }

    pub fn to_mask(&self) -> BinaryMask {
        let mut mask = BinaryMask::new(self.height, self.width);
        let h = self.height as u64;
        let mut pos: u64 = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if i % 2 == 1 {
                for p in pos..pos + c as u64 {
                    mask.set((p % h) as u32, (p / h) as u32, true);
                }
            }
            pos += c as u64;
        }
        mask
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    /// Iterator over foreground runs as `(start, len)` in column-major pixel
    /// offsets.
    pub fn runs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut pos = 0u64;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let start = pos;
            pos += c as u64;
            (i % 2 == 1 && c > 0).then_some((start, c as u64))
        })
    }

    /// Tight pixel bounds of the foreground; an all-zero box for empty masks.
    pub fn bbox(&self) -> BoundingBox {
        let h = self.height as u64;
        let (mut r0, mut r1, mut c0, mut c1) = (u64::MAX, 0u64, u64::MAX, 0u64);
        let mut any = false;
        for (start, len) in self.runs() {
            any = true;
            let end = start + len - 1;
            let (sc, ec) = (start / h, end / h);
            c0 = c0.min(sc);
            c1 = c1.max(ec);
            if sc == ec {
                r0 = r0.min(start % h);
                r1 = r1.max(end % h);
            } else {
                // The run wraps a column boundary, so it touches both the
                // first and last row.
                r0 = 0;
                r1 = h - 1;
            }
        }
        if !any {
            return BoundingBox::default();
        }
        BoundingBox::from_corners(c0 as f64, r0 as f64, (c1 + 1) as f64, (r1 + 1) as f64)
    }

    /// Mean of foreground pixel centers.
    pub fn centroid(&self) -> Result<Point2D> {
        let h = self.height as u64;
        let (mut sx, mut sy, mut n) = (0.0f64, 0.0f64, 0u64);
        for (start, len) in self.runs() {
            let mut p = start;
            let end = start + len;
            while p < end {
                let col = p / h;
                let row = p % h;
                let take = (h - row).min(end - p);
                // rows row..row+take in column col
                sx += (col as f64 + 0.5) * take as f64;
                sy += take as f64 * (row as f64 + 0.5) + (take * (take - 1)) as f64 / 2.0;
                n += take;
                p += take;
            }
        }
        if n == 0 {
            return Err(Error::EmptySegmentation);
        }
        Ok(Point2D::new(sx / n as f64, sy / n as f64))
    }

    fn check_dims(&self, other: &RleMask) -> Result<()> {
        if (self.height, self.width) != (other.height, other.width) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &RleMask) -> Result<u64> {
        self.check_dims(other)?;
        let (a, b) = (&self.counts, &other.counts);
        let (mut i, mut j) = (0usize, 0usize);
        let (mut ra, mut rb) = (0u64, 0u64);
        let mut inter = 0u64;
        loop {
            while ra == 0 {
                if i == a.len() {
                    return Ok(inter);
                }
                ra = a[i] as u64;
                i += 1;
            }
            while rb == 0 {
                if j == b.len() {
                    return Ok(inter);
                }
                rb = b[j] as u64;
                j += 1;
            }
            let step = ra.min(rb);
            // counts[k] was consumed as index k = i-1; odd index = foreground
            if i % 2 == 0 && j % 2 == 0 {
                inter += step;
            }
            ra -= step;
            rb -= step;
        }
    }

    /// Intersection over union. With `crowd` set the union is replaced by
    /// `self`'s area. Two empty masks give 0.
    pub fn iou(&self, other: &RleMask, crowd: bool) -> Result<f64> {
        let inter = self.intersection_area(other)?;
        let union = if crowd {
            self.area()
        } else {
            self.area() + other.area() - inter
        };
        Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
    }

    /// COCO compressed counts string.
    ///
    /// Counts from index 3 on are stored as the difference to the count two
    /// positions earlier; each value is then written as little-endian 5-bit
    /// groups with a continuation flag (0x20) and offset by ASCII 48.
    pub fn to_compressed_string(&self) -> String {
        let mut out = String::new();
        for (i, &c) in self.counts.iter().enumerate() {
            let mut x = c as i64;
            if i > 2 {
                x -= self.counts[i - 2] as i64;
            }
            loop {
                let mut group = (x & 0x1f) as u8;
                x >>= 5;
                let more = if group & 0x10 != 0 { x != -1 } else { x != 0 };
                if more {
                    group |= 0x20;
                }
                out.push((group + 48) as char);
                if !more {
                    break;
                }
            }
        }
        out
    }

    pub fn from_compressed_string(s: &str, height: u32, width: u32) -> Result<Self> {
        let bytes = s.as_bytes();
        let mut counts: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let mut x: i64 = 0;
            let mut shift = 0u32;
            loop {
                let Some(&ch) = bytes.get(i) else {
                    return Err(Error::CorruptString(format!("truncated continuation at byte {i}")));
                };
                if !(48..=111).contains(&ch) {
                    return Err(Error::CorruptString(format!(
                        "byte {ch:#04x} at offset {i} outside '0'..='o'"
                    )));
                }
                if shift > 58 {
                    return Err(Error::CorruptString(format!(
                        "value starting before offset {i} overflows"
                    )));
                }
                let group = (ch - 48) as i64;
                i += 1;
                x |= (group & 0x1f) << shift;
                shift += 5;
                if group & 0x20 == 0 {
                    if group & 0x10 != 0 {
                        x |= -1i64 << shift;
                    }
                    break;
                }
            }
            let m = counts.len();
            if m > 2 {
                x += counts[m - 2] as i64;
            }
            if !(0..=u32::MAX as i64).contains(&x) {
                return Err(Error::CorruptString(format!(
                    "decoded count {x} at index {m} out of range"
                )));
            }
            counts.push(x as u32);
        }
        Self::new(height, width, counts)
    }
}

/// Rectangle IoU; 0 when either box has zero area.
pub fn bbox_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    if a.is_degenerate() || b.is_degenerate() {
        return 0.0;
    }
    let iw = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(h: u32, w: u32, r0: u32, c0: u32, rh: u32, cw: u32) -> RleMask {
        BinaryMask::from_fn(h, w, |r, c| r >= r0 && r < r0 + rh && c >= c0 && c < c0 + cw).to_rle()
    }

    #[test]
    fn all_zero_counts() {
        assert_eq!(BinaryMask::new(3, 3).to_rle().counts(), &[9]);
    }

    #[test]
    fn single_corner_pixel_counts() {
        // column-major flatten of [[1,0],[0,0]] is [1,0,0,0]
        let mut m = BinaryMask::new(2, 2);
        m.set(0, 0, true);
        assert_eq!(m.to_rle().counts(), &[0, 1, 3]);
    }

    #[test]
    fn corrupt_sum_rejected() {
        assert!(matches!(RleMask::new(2, 2, vec![1, 1]), Err(Error::CorruptRle(_))));
    }

    #[test]
    fn hand_encoded_strings() {
        // [0,1,3]: each count < 16 fits one group with no continuation:
        // 0+48='0', 1+48='1', 3+48='3' (index 2 is still stored raw)
        let r = RleMask::new(2, 2, vec![0, 1, 3]).unwrap();
        assert_eq!(r.to_compressed_string(), "013");
        // [9]: 9 < 16, one group, 9+48 = '9'
        assert_eq!(RleMask::new(3, 3, vec![9]).unwrap().to_compressed_string(), "9");
        // 40 = 0b101000: low group 0b01000 (8) with continuation -> 8|32+48 = 'X'
        // remaining 1 -> '1'
        assert_eq!(RleMask::new(40, 1, vec![40]).unwrap().to_compressed_string(), "X1");
        // [5,10,20,1]: 20 has bit 4 set but 20 >> 5 = 0, so it needs a
        // continuation: (20|32)+48 = 'd', then '0'. Index 3 stores
        // 1-10 = -9: -9 & 31 = 23, -9 >> 5 = -1, no continuation: 'G'
        assert_eq!(
            RleMask::new(36, 1, vec![5, 10, 20, 1]).unwrap().to_compressed_string(),
            "5:d0G"
        );
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(
            RleMask::from_compressed_string("0p", 1, 1),
            Err(Error::CorruptString(_))
        ));
        assert!(matches!(
            RleMask::from_compressed_string("X", 40, 1),
            Err(Error::CorruptString(_))
        ));
        assert!(matches!(
            RleMask::from_compressed_string("8", 1, 1),
            Err(Error::CorruptRle(_))
        ));
    }

    #[test]
    fn ious() {
        let a = block(20, 20, 0, 0, 10, 10);
        let b = block(20, 20, 0, 5, 10, 10);
        assert!((a.iou(&b, false).unwrap() - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(a.iou(&a, false).unwrap(), 1.0);
        let c = block(20, 20, 10, 10, 5, 5);
        assert_eq!(a.iou(&c, false).unwrap(), 0.0);
        assert_eq!(RleMask::empty(4, 4).iou(&RleMask::empty(4, 4), false).unwrap(), 0.0);
        // crowd: union is area(a)
        assert!((a.iou(&b, true).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            a.iou(&RleMask::empty(3, 3), false),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn box_ious() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(bbox_iou(&a, &a), 1.0);
        assert!((bbox_iou(&a, &BoundingBox::new(5.0, 0.0, 10.0, 10.0)) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(bbox_iou(&a, &BoundingBox::new(10.0, 0.0, 10.0, 10.0)), 0.0);
        assert_eq!(bbox_iou(&a, &BoundingBox::new(0.0, 0.0, 0.0, 10.0)), 0.0);
    }

    #[test]
    fn centroids_and_bbox() {
        let mut m = BinaryMask::new(5, 5);
        m.set(2, 3, true);
        assert_eq!(m.to_rle().centroid().unwrap(), Point2D::new(3.5, 2.5));
        let mut m = BinaryMask::new(3, 3);
        m.set(0, 0, true);
        m.set(0, 2, true);
        assert_eq!(m.to_rle().centroid().unwrap(), Point2D::new(1.5, 0.5));
        assert_eq!(m.to_rle().bbox(), BoundingBox::new(0.0, 0.0, 3.0, 1.0));
        assert!(matches!(RleMask::empty(2, 2).centroid(), Err(Error::EmptySegmentation)));
        // a run spanning a column boundary
        let b = block(4, 4, 2, 1, 2, 2).bbox();
        assert_eq!(b, BoundingBox::new(1.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn column_intervals_match_dense() {
        let m = BinaryMask::from_fn(6, 5, |r, c| {
            (c == 1 && (1..4).contains(&r)) || (c == 2 && r >= 3) || (c == 3 && r < 2)
        });
        let r = RleMask::from_column_intervals(6, 5, [(1, 1, 4), (2, 3, 6), (3, 0, 2)]).unwrap();
        assert_eq!(r, m.to_rle());
    }
}
