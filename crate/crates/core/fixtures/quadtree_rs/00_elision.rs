//@ unit Func:elision_
pub fn elision_(_key: Option<usize>) {}
