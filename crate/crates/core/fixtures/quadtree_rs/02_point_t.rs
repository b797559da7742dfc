//@ unit Struct:quadtree_point_t
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadtreePoint {
    pub x: f64,
    pub y: f64,
    pub key: Option<usize>,
}
