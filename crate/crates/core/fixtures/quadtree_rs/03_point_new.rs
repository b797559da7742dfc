//@ unit Func:quadtree_point_new
pub fn quadtree_point_new(x: f64, y: f64) -> Option<Box<QuadtreePoint>> {
    Some(Box::new(QuadtreePoint { x, y, key: None }))
}
