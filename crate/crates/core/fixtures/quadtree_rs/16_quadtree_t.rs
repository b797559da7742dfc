//@ unit Struct:quadtree_t
#[derive(Default)]
pub struct Quadtree {
    pub root: Option<Box<QuadtreeNode>>,
    pub key_free: Option<Box<dyn Fn(Option<usize>)>>,
    pub length: u32,
}
