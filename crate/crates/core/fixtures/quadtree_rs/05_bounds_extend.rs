//@ unit Func:quadtree_bounds_extend
pub fn quadtree_bounds_extend(bounds: &mut QuadtreeBounds, x: f64, y: f64) {
    if x < bounds.nw.x {
        bounds.nw.x = x;
    }
    if y > bounds.nw.y {
        bounds.nw.y = y;
    }
    if x > bounds.se.x {
        bounds.se.x = x;
    }
    if y < bounds.se.y {
        bounds.se.y = y;
    }
    bounds.width = bounds.se.x - bounds.nw.x;
    bounds.height = bounds.nw.y - bounds.se.y;
}
