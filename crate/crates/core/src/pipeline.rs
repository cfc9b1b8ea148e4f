//! Path in, projector frame out: resample, headings, markers, render.

use crate::error::Result;
use crate::geometry::{RigidTransform, TransformTree};
use crate::marker::{markers_for_anchors, MarkerSpec, StyleConfig};
use crate::projector::{ProjectorConfig, ProjectorView};
use crate::render::{render_frame, Framebuffer, Scene};
use crate::resample::{derive_headings, resample, AnchorList, NavPath, ResampleParams};

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub projector: ProjectorConfig,
    pub style: StyleConfig,
    pub params: ResampleParams,
    /// Used to place the robot base in the path's frame. Without it, or when
    /// the tree does not know the path frame, the base sits at the path origin.
    pub transforms: Option<TransformTree>,
}

impl Pipeline {
    pub fn new(projector: ProjectorConfig, style: StyleConfig, params: ResampleParams) -> Result<Self> {
        params.validate()?;
        style.validate()?;
        Ok(Self { projector, style, params, transforms: None })
    }

    /// Also takes the projector mount from the tree when it links the mount's frames.
    pub fn with_transforms(mut self, tree: TransformTree) -> Result<Self> {
        if tree.contains_frame(self.projector.base_frame())
            && tree.contains_frame(self.projector.lens_frame())
        {
            self.projector = self.projector.clone().with_mount_from(&tree)?;
        }
        self.transforms = Some(tree);
        Ok(self)
    }

    /// Path frame -> robot base.
    pub fn robot_pose(&self, path_frame: &str) -> Result<RigidTransform> {
        let base = self.projector.base_frame();
        match &self.transforms {
            Some(tree) if tree.contains_frame(path_frame) && tree.contains_frame(base) => {
                tree.lookup(path_frame, base)
            }
            _ => Ok(RigidTransform::identity(path_frame, base)),
        }
    }

    pub fn anchors(&self, path: &NavPath) -> Result<AnchorList> {
        Ok(derive_headings(&resample(path, &self.params)?))
    }

    pub fn markers(&self, path: &NavPath) -> Result<Vec<MarkerSpec>> {
        let pose = self.robot_pose(&path.frame)?;
        let lens = ProjectorView::new(&self.projector, &pose)?.lens_position();
        markers_for_anchors(&self.anchors(path)?, &self.style, self.params.destination_diameter_m, Some(lens))
    }

    pub fn scene(&self, path: &NavPath) -> Result<Scene> {
        Ok(Scene::new(self.markers(path)?, self.robot_pose(&path.frame)?))
    }

    pub fn render_path(&self, path: &NavPath) -> Result<Framebuffer> {
        render_frame(&self.scene(path)?, &self.projector)
    }
}
