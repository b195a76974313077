//! Exact dyadic geometry: scalars, cubes, faces, boxes, voxels and balls.

mod ball;
mod cube;
mod face;
mod ibox;
mod scalar;
mod voxel;

pub use ball::LinfBall;
pub use cube::{cube_children, DyadicCube};
pub use face::{enumerate_faces, face_relation, linf_distance, DyadicFace, FaceRelation, Shape};
pub use ibox::IBox;
pub use scalar::DyadicScalar;
pub use voxel::{VoxelSet, MAX_DIM};
