//! 3D Morton (Z-order) codes for up to 21 bits per axis.
//!
//! Bit `3i` holds bit `i` of x, `3i+1` of y and `3i+2` of z, so the three low
//! bits of a code are the child index of the voxel inside its parent cell.

fn spread(v: u32) -> u64 {
    let mut x = (v as u64) & 0x1f_ffff;
    x = (x | x << 32) & 0x1f00000000ffff;
    x = (x | x << 16) & 0x1f0000ff0000ff;
    x = (x | x << 8) & 0x100f00f00f00f00f;
    x = (x | x << 4) & 0x10c30c30c30c30c3;
    x = (x | x << 2) & 0x1249249249249249;
    x
}

fn compact(mut x: u64) -> u32 {
    x &= 0x1249249249249249;
    x = (x ^ (x >> 2)) & 0x10c30c30c30c30c3;
    x = (x ^ (x >> 4)) & 0x100f00f00f00f00f;
    x = (x ^ (x >> 8)) & 0x1f0000ff0000ff;
    x = (x ^ (x >> 16)) & 0x1f00000000ffff;
    x = (x ^ (x >> 32)) & 0x1f_ffff;
    x as u32
}

pub fn encode(v: [u32; 3]) -> u64 {
    spread(v[0]) | spread(v[1]) << 1 | spread(v[2]) << 2
}

pub fn decode(code: u64) -> [u32; 3] {
    [compact(code), compact(code >> 1), compact(code >> 2)]
}
