//! The bundled parametric shape catalog: eight desk-scale categories, each a
//! closed multi-part solid with named parts. Thin features (handles, legs,
//! necks) keep 5–9 mm cross-sections so a parallel-jaw hand can close on
//! them; broad surfaces (table tops, guitar bodies) stay graspable at their
//! rims through their thickness.

use crate::error::{Error, Result};
use crate::shape::builder::MeshBuilder;
use crate::shape::mesh::PartMesh;

/// Data version recorded in dataset manifests.
pub const CATALOG_VERSION: &str = "1.0.0";

/// All catalog categories.
pub const CATEGORIES: [&str; 8] =
    ["mug", "table", "hammer", "lamp", "bag", "knife", "guitar", "pistol"];

/// One tunable dimension of a catalog shape, with its admissible range in
/// meters and the value used when the caller passes no override.
#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub default: f64,
}

const fn spec(name: &'static str, min: f64, max: f64, default: f64) -> ParamSpec {
    ParamSpec { name, min, max, default }
}

const MUG_PARAMS: [ParamSpec; 3] = [
    spec("body_radius", 0.026, 0.038, 0.032),
    spec("body_height", 0.07, 0.10, 0.085),
    spec("handle_thickness", 0.005, 0.009, 0.007),
];
const TABLE_PARAMS: [ParamSpec; 5] = [
    spec("top_width", 0.14, 0.20, 0.17),
    spec("top_depth", 0.10, 0.16, 0.13),
    spec("height", 0.07, 0.10, 0.085),
    spec("top_thickness", 0.006, 0.009, 0.0075),
    spec("leg_side", 0.006, 0.009, 0.0075),
];
const HAMMER_PARAMS: [ParamSpec; 4] = [
    spec("handle_length", 0.09, 0.13, 0.11),
    spec("handle_radius", 0.005, 0.008, 0.0065),
    spec("head_length", 0.028, 0.042, 0.035),
    spec("head_side", 0.012, 0.018, 0.015),
];
const LAMP_PARAMS: [ParamSpec; 4] = [
    spec("base_radius", 0.03, 0.045, 0.0375),
    spec("pole_height", 0.08, 0.12, 0.10),
    spec("shade_radius", 0.026, 0.036, 0.032),
    spec("shade_height", 0.04, 0.06, 0.05),
];
const BAG_PARAMS: [ParamSpec; 4] = [
    spec("body_width", 0.08, 0.12, 0.10),
    spec("body_depth", 0.03, 0.05, 0.04),
    spec("body_height", 0.06, 0.09, 0.075),
    spec("handle_thickness", 0.005, 0.008, 0.0065),
];
const KNIFE_PARAMS: [ParamSpec; 4] = [
    spec("blade_length", 0.07, 0.10, 0.085),
    spec("blade_height", 0.014, 0.020, 0.017),
    spec("blade_thickness", 0.002, 0.004, 0.003),
    spec("handle_length", 0.06, 0.09, 0.075),
];
const GUITAR_PARAMS: [ParamSpec; 5] = [
    spec("body_width", 0.09, 0.12, 0.105),
    spec("body_depth", 0.07, 0.09, 0.08),
    spec("body_thickness", 0.012, 0.020, 0.016),
    spec("neck_length", 0.08, 0.12, 0.10),
    spec("neck_width", 0.012, 0.018, 0.015),
];
const PISTOL_PARAMS: [ParamSpec; 4] = [
    spec("body_length", 0.07, 0.10, 0.085),
    spec("body_side", 0.015, 0.024, 0.0195),
    spec("grip_height", 0.03, 0.045, 0.0375),
    spec("grip_thickness", 0.012, 0.018, 0.015),
];

/// The dimension table for a category.
pub fn param_spec(category: &str) -> Result<&'static [ParamSpec]> {
    match category {
        "mug" => Ok(&MUG_PARAMS),
        "table" => Ok(&TABLE_PARAMS),
        "hammer" => Ok(&HAMMER_PARAMS),
        "lamp" => Ok(&LAMP_PARAMS),
        "bag" => Ok(&BAG_PARAMS),
        "knife" => Ok(&KNIFE_PARAMS),
        "guitar" => Ok(&GUITAR_PARAMS),
        "pistol" => Ok(&PISTOL_PARAMS),
        other => Err(Error::UnknownCategory(other.to_string())),
    }
}

/// Resolve caller params against the spec: provided values override the
/// leading dimensions (each range-checked), defaults fill the rest. More
/// values than dimensions is an out-of-range index.
fn resolve_params(specs: &'static [ParamSpec], params: &[f64]) -> Result<Vec<f64>> {
    if params.len() > specs.len() {
        return Err(Error::ParamOutOfRange {
            index: specs.len(),
            value: params[specs.len()],
            min: 0.0,
            max: 0.0,
        });
    }
    let mut out = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        let v = params.get(i).copied().unwrap_or(s.default);
        if !(v >= s.min && v <= s.max) {
            return Err(Error::ParamOutOfRange { index: i, value: v, min: s.min, max: s.max });
        }
        out.push(v);
    }
    Ok(out)
}

/// Deterministic tessellation phase in [0, 2π/segments): same solid, seeded
/// facet placement, so instances with different seeds are not byte-clones.
fn phase_from_seed(seed: u64, segments: usize) -> f64 {
    let mut z = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    let frac = ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64;
    frac * std::f64::consts::TAU / segments as f64
}

/// Build a catalog shape. `params` may be empty (all defaults) or supply the
/// leading dimensions; see [`param_spec`] for names and ranges. The mesh is
/// a deterministic function of `(category, params, seed)`.
pub fn make_shape(category: &str, params: &[f64], seed: u64) -> Result<PartMesh> {
    let specs = param_spec(category)?;
    let p = resolve_params(specs, params)?;
    let mesh = match category {
        "mug" => build_mug(&p, seed),
        "table" => build_table(&p),
        "hammer" => build_hammer(&p, seed),
        "lamp" => build_lamp(&p, seed),
        "bag" => build_bag(&p),
        "knife" => build_knife(&p),
        "guitar" => build_guitar(&p),
        "pistol" => build_pistol(&p),
        _ => unreachable!("param_spec already validated the category"),
    };
    mesh.validate()?;
    Ok(mesh)
}

fn build_mug(p: &[f64], seed: u64) -> PartMesh {
    let (r, h, t) = (p[0], p[1], p[2]);
    let mut b = MeshBuilder::new();
    b.push_cylinder(0, [0.0, 0.0, 0.0], r, h, 24, phase_from_seed(seed, 24));
    // C-shaped handle in the xz-plane: vertical bar held off the wall, two
    // stubs running from just inside the wall through the bar.
    let standoff = 0.022;
    let bar_x = r + standoff + t * 0.5;
    b.push_box(1, [bar_x, 0.0, h * 0.5], [t, t, h * 0.5]);
    let sx0 = r - 0.002;
    let sx1 = bar_x + t * 0.5;
    for z in [0.25 * h + t * 0.5, 0.75 * h - t * 0.5] {
        b.push_box(1, [(sx0 + sx1) * 0.5, 0.0, z], [sx1 - sx0, t, t]);
    }
    b.into_mesh("mug", &[(0, "body"), (1, "handle")])
}

fn build_table(p: &[f64]) -> PartMesh {
    let (w, d, h, t, leg) = (p[0], p[1], p[2], p[3], p[4]);
    let mut b = MeshBuilder::new();
    b.push_box(0, [0.0, 0.0, h - t * 0.5], [w, d, t]);
    let inset = leg * 0.5 + 0.004;
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            b.push_box(
                1,
                [sx * (w * 0.5 - inset), sy * (d * 0.5 - inset), (h - t) * 0.5],
                [leg, leg, h - t],
            );
        }
    }
    b.into_mesh("table", &[(0, "top"), (1, "leg")])
}

fn build_hammer(p: &[f64], seed: u64) -> PartMesh {
    let (hl, hr, head_l, head_s) = (p[0], p[1], p[2], p[3]);
    let mut b = MeshBuilder::new();
    b.push_cylinder(1, [0.0, 0.0, 0.0], hr, hl, 16, phase_from_seed(seed, 16));
    b.push_box(0, [0.0, 0.0, hl + head_s * 0.5 - 0.001], [head_l, head_s, head_s]);
    b.into_mesh("hammer", &[(0, "head"), (1, "handle")])
}

fn build_lamp(p: &[f64], seed: u64) -> PartMesh {
    let (br, ph, sr, sh) = (p[0], p[1], p[2], p[3]);
    let mut b = MeshBuilder::new();
    let phase = phase_from_seed(seed, 20);
    b.push_cylinder(0, [0.0, 0.0, 0.0], br, 0.01, 20, phase);
    b.push_cylinder(0, [0.0, 0.0, 0.0095], 0.0045, ph + 0.0005, 12, phase);
    // Gentle taper: the shade's side slope must sit well inside the friction
    // cone of a rubber-padded gripper or the part is ungraspable by design.
    b.push_frustum(1, [0.0, 0.0, 0.01 + ph - 0.002], sr, sr * 0.85, sh, 20, phase);
    b.into_mesh("lamp", &[(0, "base"), (1, "shade")])
}

fn build_bag(p: &[f64]) -> PartMesh {
    let (bw, bd, bh, t) = (p[0], p[1], p[2], p[3]);
    let mut b = MeshBuilder::new();
    b.push_box(0, [0.0, 0.0, bh * 0.5], [bw, bd, bh]);
    let bar_len = 0.45 * bw;
    let rise = 0.025;
    b.push_box(1, [0.0, 0.0, bh + rise], [bar_len, t, t]);
    let post_x = bar_len * 0.5 - t * 0.5;
    let z0 = bh - 0.002;
    let z1 = bh + rise - t * 0.5 + 0.001;
    for s in [-1.0, 1.0] {
        b.push_box(1, [s * post_x, 0.0, (z0 + z1) * 0.5], [t, t, z1 - z0]);
    }
    b.into_mesh("bag", &[(0, "body"), (1, "handle")])
}

fn build_knife(p: &[f64]) -> PartMesh {
    let (bl, bhgt, bt, hl) = (p[0], p[1], p[2], p[3]);
    let mut b = MeshBuilder::new();
    b.push_box(0, [bl * 0.5 - 0.002, 0.0, bhgt * 0.5], [bl, bt, bhgt]);
    b.push_box(1, [-hl * 0.5 + 0.002, 0.0, 0.0065], [hl, 0.009, 0.013]);
    b.into_mesh("knife", &[(0, "blade"), (1, "handle")])
}

fn build_guitar(p: &[f64]) -> PartMesh {
    let (bw, bd, bt, nl, nw) = (p[0], p[1], p[2], p[3], p[4]);
    let mut b = MeshBuilder::new();
    b.push_box(0, [0.0, 0.0, bt * 0.5], [bw, bd, bt]);
    let nt = 0.45 * nw;
    b.push_box(1, [bw * 0.5 + nl * 0.5 - 0.004, 0.0, bt * 0.5], [nl + 0.008, nw, nt]);
    b.into_mesh("guitar", &[(0, "body"), (1, "neck")])
}

fn build_pistol(p: &[f64]) -> PartMesh {
    let (bl, bs, gd, gt) = (p[0], p[1], p[2], p[3]);
    let mut b = MeshBuilder::new();
    b.push_box(0, [bl * 0.5 - 0.012, 0.0, gd + bs * 0.5 - 0.001], [bl, bs, bs]);
    b.push_box(1, [0.0, 0.0, (gd + 0.001) * 0.5], [0.02, gt, gd + 0.001]);
    b.push_box(2, [0.022, 0.0, gd - 0.006], [0.005, 0.005, 0.012]);
    b.into_mesh("pistol", &[(0, "body"), (1, "handle"), (2, "trigger")])
}
