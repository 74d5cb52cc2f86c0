//! File formats and rendering for the `flatcur` command line tool.
//!
//! The interchange formats are plain JSON documents:
//!
//! * surface — `{ "n": 4, "polygons": [{ "id": 0, "vertices": [[x, y], …] }],
//!   "gluings": [{ "from": [pid, eidx], "to": [pid, eidx], "rotation": r }] }`
//! * norm polygon — `{ "n": 3, "vertices": [[x, y], …] }`
//! * web measure — `{ "n": 3, "atoms": [[theta, weight], …] }`
//! * curve — `{ "closed": true, "waypoints": [[pid, x, y], …] }`

pub mod formats;
pub mod svg;

pub use formats::{
    curve_from_json, curve_to_json, geodesic_to_json, measure_from_json, measure_to_json,
    norm_from_json, norm_to_json, parse_surface, resolve_norm, serialize_surface, trace_to_json,
    NormArg,
};
