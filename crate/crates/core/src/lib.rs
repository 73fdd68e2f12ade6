//! Turns KiCad `.kicad_pcb` design files into 3D-printable substrate models.
//!
//! The printed board is a solid PVA body with a hollow channel network in place
//! of copper: traces become rectangular channels, vias become vertical bores,
//! and pads become surface openings that double as injection ports for liquid
//! metal. Component sockets are subtracted from the body so parts press-fit
//! directly into the print.
//!
//! The pipeline is split into layers that can be used independently:
//!
//! - [`sexpr`] / [`pcb_model`]: parse the board file and extract a typed design
//! - [`process`]: printable-feature limits and the vertical stackup
//! - [`drc`]: clearance and width checks against the process limits
//! - [`geom`]: a small CSG kernel (exact membership, signed distance, volume)
//! - [`synth`]: design + process -> body, channel network, socket cavities
//! - [`meshing`] / [`stl`]: marching-cubes surface extraction and STL output
//! - [`analysis`]: channel resistance, net graphs, and material quantities
//! - [`inventory`]: fabrication input accounting and impact factor sums
//! - [`cli`]: the `lmpcb` command-line front end

pub mod analysis;
pub mod cli;
pub mod drc;
pub mod geom;
pub mod inventory;
pub mod meshing;
pub mod pcb_model;
pub mod process;
pub mod sexpr;
pub mod socket;
pub mod stl;
pub mod synth;
