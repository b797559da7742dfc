//@ unit Func:quadtree_node_new
pub fn quadtree_node_new() -> Option<Box<QuadtreeNode>> {
    Some(Box::default())
}
