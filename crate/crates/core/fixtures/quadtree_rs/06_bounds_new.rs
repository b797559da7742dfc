//@ unit Func:quadtree_bounds_new
pub fn quadtree_bounds_new() -> Option<Box<QuadtreeBounds>> {
    Some(Box::new(QuadtreeBounds {
        nw: quadtree_point_new(0.0, 0.0)?,
        se: quadtree_point_new(0.0, 0.0)?,
        width: 0.0,
        height: 0.0,
    }))
}
