//@ unit Func:insert_
pub fn insert_(
    key_free: Option<&dyn Fn(Option<usize>)>,
    root: &mut QuadtreeNode,
    point: Box<QuadtreePoint>,
) -> i32 {
    if quadtree_node_isempty(root) {
        root.point = Some(point);
        1
    } else if quadtree_node_isleaf(root) {
        let same = root
            .point
            .as_deref()
            .is_some_and(|p| p.x == point.x && p.y == point.y);
        if same {
            reset_node_(key_free, root);
            root.point = Some(point);
            2
        } else {
            if split_node_(key_free, root) == 0 {
                return 0;
            }
            insert_(key_free, root, point)
        }
    } else if quadtree_node_ispointer(root) {
        match get_quadrant_(root, &point) {
            Some(quadrant) => insert_(key_free, quadrant, point),
            None => 0,
        }
    } else {
        0
    }
}
