//@ unit Func:node_contains_
pub fn node_contains_(outer: Option<&QuadtreeNode>, it: &QuadtreePoint) -> bool {
    outer.and_then(|o| o.bounds.as_deref()).is_some_and(|b| {
        b.nw.x <= it.x && b.nw.y >= it.y && b.se.x >= it.x && b.se.y <= it.y
    })
}
