//! The built-in library. Generators and `==` for every data type are
//! derived during lowering.

use crate::error::CompileError;
use crate::syntax::ast::SurfaceProgram;
use crate::syntax::parser::parse_program;

pub const PRELUDE_SOURCE: &str = r#"-- Prelude
data Bool = True | False
data List a = Nil | Cons a (List a)
data Nat = Z | S Nat

x ? _ = x
_ ? y = y

Success & c = c

cond Success x = x

not True = False
not False = True

True && x = x
False && _ = False

True || _ = True
False || x = x

xor True x = not x
xor False x = x

xorSelf x = xor x x

aBool = True ? False

(++) :: [a] -> [a] -> [a]
[] ++ ys = ys
(x:xs) ++ ys = x : xs ++ ys

head :: [a] -> a
head (x:_) = x

tail :: [a] -> [a]
tail (_:xs) = xs

null [] = True
null (_:_) = False

length :: [a] -> Nat
length [] = Z
length (_:xs) = S (length xs)

map :: (a -> b) -> [a] -> [b]
map _ [] = []
map f (x:xs) = f x : map f xs

foldr f z [] = z
foldr f z (x:xs) = f x (foldr f z xs)

elem _ [] = False
elem x (y:ys) = x == y || elem x ys

nub [] = []
nub (x:xs) = x : nub (removeAll x xs)

removeAll _ [] = []
removeAll x (y:ys) = keepUnless (x == y) y (removeAll x ys)

keepUnless True _ ys = ys
keepUnless False y ys = y : ys

reverse :: [a] -> [a]
reverse xs = revApp xs []

revApp [] ys = ys
revApp (x:xs) ys = revApp xs (x : ys)

(+) :: Nat -> Nat -> Nat
Z + y = y
S x + y = S (x + y)

inc :: Nat -> Nat -> Nat
inc n x = x + n

leq Z _ = True
leq (S _) Z = False
leq (S x) (S y) = leq x y

fromTo :: Nat -> Nat -> [Nat]
fromTo m n = fromToIf (leq m n) m n

fromToIf True m n = m : fromTo (S m) n
fromToIf False _ _ = []
"#;

pub fn prelude_program() -> SurfaceProgram {
    parse_program(PRELUDE_SOURCE).expect("prelude parses")
}

/// Combines the prelude with a user program. User functions and type
/// signatures shadow prelude ones of the same name; data types may not be
/// redefined.
pub fn merge(prelude: &SurfaceProgram, user: &SurfaceProgram) -> Result<SurfaceProgram, CompileError> {
    let mut out = SurfaceProgram::default();
    for d in &user.data {
        if prelude.data.iter().any(|p| p.name == d.name) {
            return Err(CompileError::Duplicate(d.name.clone()));
        }
    }
    out.data = prelude.data.iter().chain(&user.data).cloned().collect();
    out.sigs = prelude
        .sigs
        .iter()
        .filter(|s| user.sig(&s.name).is_none())
        .chain(&user.sigs)
        .cloned()
        .collect();
    out.funcs = prelude
        .funcs
        .iter()
        .filter(|f| user.func(&f.name).is_none())
        .chain(&user.funcs)
        .cloned()
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use crate::syntax::compile_program;
    use crate::syntax::validate::validate;

    #[test]
    fn prelude_lowers_and_validates() {
        let p = compile_program("", true).unwrap();
        assert!(validate(&p).is_empty());
        for name in ["?", "&", "cond", "++", "map", "elem", "nub", "gen@Bool", "gen@List", "eq@Nat"] {
            assert!(p.func_named(name).is_some(), "{name}");
        }
    }
}
