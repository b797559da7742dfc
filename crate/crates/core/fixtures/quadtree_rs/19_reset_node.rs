//@ unit Func:reset_node_
pub fn reset_node_(key_free: Option<&dyn Fn(Option<usize>)>, node: &mut QuadtreeNode) {
    let key = node.point.as_ref().and_then(|p| p.key);
    match key_free {
        Some(f) => f(key),
        None => elision_(key),
    }
}
