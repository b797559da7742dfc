//@ unit Struct:quadtree_bounds_t
#[derive(Debug, Clone, PartialEq)]
pub struct QuadtreeBounds {
    pub nw: Box<QuadtreePoint>,
    pub se: Box<QuadtreePoint>,
    pub width: f64,
    pub height: f64,
}
