//! Scene and plan fixtures shared by the integration tests.
#![allow(dead_code)]

use monoview::camera::{background_plane_placement, CameraModel};
use monoview::context::{CanonicalFrame, ShotAngle};
use monoview::math::{Quat, Vec3};
use monoview::render::TriMesh;
use monoview::scene::{CameraFrameHint, ObjectInstance, Scene3D};
use nalgebra::Rotation3;

pub const CAN: u32 = 3;
pub const BOWL: u32 = 4;
pub const BEAR: u32 = 5;
pub const SCREWDRIVER: u32 = 6;
pub const AVOCADO: u32 = 7;
pub const TABLE: u32 = 1;

pub fn camera() -> CameraModel {
    CameraModel::from_fov(640, 480, 60.0).unwrap()
}

/// Box object given in world coordinates, turned `yaw_deg` about world z.
pub fn world_box(frame: &CanonicalFrame, id: u32, name: &str, half: Vec3, center: Vec3, yaw_deg: f64) -> ObjectInstance {
    let q = Quat::from_axis_angle(&Vec3::z_axis(), yaw_deg.to_radians());
    let world_to_camera = Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(frame.mapping.transpose()));
    ObjectInstance::new(
        id,
        name,
        TriMesh::cuboid(half),
        world_to_camera * q,
        frame.to_camera(&center),
        1.0,
        &CameraFrameHint::from(frame),
    )
}

pub fn scene_of(objects: Vec<ObjectInstance>, shot_angle: ShotAngle) -> Scene3D {
    let cam = camera();
    Scene3D {
        camera: cam,
        objects,
        background: background_plane_placement(&cam, 200.0),
        shot_angle,
    }
}

/// Table top at world z = -20 with small household objects resting 1 cm above it.
pub fn tabletop() -> Scene3D {
    let f = CanonicalFrame::new(ShotAngle::Horizontal);
    scene_of(
        vec![
            world_box(&f, TABLE, "table", Vec3::new(45.0, 28.0, 1.0), Vec3::new(0.0, 80.0, -21.0), 0.0),
            world_box(&f, CAN, "can", Vec3::new(2.5, 2.4, 4.0), Vec3::new(-15.0, 70.0, -15.0), 0.0),
            world_box(&f, BOWL, "bowl", Vec3::new(7.0, 6.5, 2.5), Vec3::new(10.0, 75.0, -16.5), 10.0),
            world_box(&f, BEAR, "bear", Vec3::new(4.0, 3.0, 6.0), Vec3::new(28.0, 88.0, -13.0), -20.0),
            world_box(&f, SCREWDRIVER, "screwdriver", Vec3::new(8.0, 1.2, 1.0), Vec3::new(-25.0, 92.0, -18.0), 0.0),
            world_box(&f, AVOCADO, "avocado", Vec3::new(3.0, 2.5, 3.5), Vec3::new(-4.0, 95.0, -15.5), 0.0),
        ],
        ShotAngle::Horizontal,
    )
}

pub const CAN_TO_BOWL: &str = "Task Name: Can to Bowl Transfer
Manipulating obj idx: 3
Interacting obj idx: 4
1. Move Manipulating Obj [3] to [6, 0, 7] cm relative to Target Obj [4]'s local [x, y, z] axes.
2. rotate_wref: Rotate Manipulating Obj [3] relative to Target Obj [4] around [pitch] axis by [75] degrees.
";

pub const BEAR_ROTATION: &str = "Task Category: Bear rotation
Description: Rotate the toy bear 90 degrees on its vertical axis.
Motion Planning:
Manipulating obj idx: bear_idx→5
Interacting obj idx: bear_idx→5
1.\trotate_self: Rotate Manipulating Object [bear_idx→5] around its local axis [z] by [90] degrees.
";

pub const CUP_TRANSFER: &str = "Task Name: Cup content transfer
Description: Pick up the mug and pour its contents into the bowl.
Motion Planning:
Manipulating obj idx: cup_idx→3
Interacting obj idx: bowl_idx→4
1.\ttranslate_tar_obj: Move Manipulating Object [cup_idx→3] to [5, -7, 5] cm relative to Target Object [bowl_idx→4]'s local [x, y, z] axes.
2.\trotate_wref: Rotate Manipulating Object [obj_idx→3] relative to Target Object [bowl_obj_idx→4] around [pitch] axis by [fixed_towards].
";

pub const SCREWDRIVER_PENETRATION: &str = "Task Name: Screwdriver penetration
Description: Use a screwdriver to penetrate an avocado.
Motion Planning:
Manipulating obj idx: screw_idx→6
Interacting obj idx: avocado_idx→7
1.\ttranslate_tar_obj: Move Manipulating Object [screw_idx→6] to [-5, -5, 0] cm relative to Target Object [avocado_idx→7]'s local [x, y, z] axes.
2.\trotate_wref: Rotate Manipulating Object [screw_idx→6] relative to Target Object [avocado_idx→7] around [yaw] axis by [fixed_towards].
3.\trotate_wref: Rotate Manipulating Object [screw_idx→6] relative to Target Object [avocado_idx→7] around [roll] axis by [360] degrees.
";

pub const CAN_RELOCATION: &str = "Task name: Can Relocation
Description: Pick up the can and place it inside the bowl.
Manipulating obj idx: 3
Interacting obj idx: 4
1. translate_direc_axis: Move Manipulating Object [3] [10] cm along the directional vector from Reference Object [3] to Reference Object [4].
2. translate_tar_obj: Move Manipulating Object [3] to [0, 0, 7] cm relative to Target Object [4]'s local [x, y, z] axes.
3. rotate_self: Rotate Manipulating Object [3] around its local axis [z] by [-45] degrees.
";

/// Every example program with a name.
pub fn example_plans() -> [(&'static str, &'static str); 5] {
    [
        ("can_to_bowl", CAN_TO_BOWL),
        ("bear_rotation", BEAR_ROTATION),
        ("cup_transfer", CUP_TRANSFER),
        ("screwdriver_penetration", SCREWDRIVER_PENETRATION),
        ("can_relocation", CAN_RELOCATION),
    ]
}
