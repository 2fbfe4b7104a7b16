//! Mean-fixing randomization maps and their random laws.
//!
//! On S¹, ℝ^d and Bures-Wasserstein space the randomization is a fair coin
//! between the identity and the geodesic symmetry about the center. On a
//! booklet it permutes the branches that do not hold the center and flips the
//! page coordinate about the center's page with an independent fair coin.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::bures::{self, BaseFrame};
use crate::geometry::{BookletPoint, CirclePoint, Point, Space};

/// Two images closer than this count as the same point.
pub const DISTINCT_TOL: f64 = 1e-9;

/// Geodesic symmetry `x ↦ exp_c(−log_c x)` about a center.
#[derive(Debug, Clone)]
pub struct GeodesicSymmetry {
    center: Point,
    frame: Option<Arc<BaseFrame>>,
}

impl GeodesicSymmetry {
    pub fn new(center: Point) -> Result<Self> {
        let frame = match &center {
            Point::Spd(m) => Some(Arc::new(BaseFrame::new(m)?)),
            Point::Booklet(_) => {
                return Err(Error::Unsupported(
                    "geodesic symmetry on a booklet; use a booklet map".into(),
                ))
            }
            _ => None,
        };
        Ok(Self { center, frame })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match (&self.center, x) {
            (Point::Circle(c), Point::Circle(p)) => Ok(Point::Circle(c.reflect(p))),
            (Point::Euclidean(c), Point::Euclidean(p)) if c.coords().len() == p.coords().len() => {
                Point::vector(
                    c.coords()
                        .iter()
                        .zip(p.coords())
                        .map(|(a, b)| 2.0 * a - b)
                        .collect(),
                )
            }
            (Point::Spd(c), Point::Spd(p)) => {
                if c == p {
                    return Ok(x.clone());
                }
                let frame = self.frame.as_ref().expect("frame built for SPD centers");
                Ok(Point::Spd(bures::reflect(frame, p)?))
            }
            _ => Err(Error::SpaceMismatch {
                space: format!("{:?}", self.center),
                reason: "point does not match the symmetry center".into(),
            }),
        }
    }
}

/// A branch permutation fixing the center's branch, optionally combined with
/// the page reflection `y ↦ 2 y_c − y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BookletMap {
    center: BookletPoint,
    /// `permutation[z − 1]` is the image of branch `z`.
    permutation: Vec<usize>,
    reflect_page: bool,
}

impl BookletMap {
    pub fn new(center: BookletPoint, permutation: Vec<usize>, reflect_page: bool) -> Result<Self> {
        let k = permutation.len();
        let mut seen = vec![false; k + 1];
        for &z in &permutation {
            if z == 0 || z > k || seen[z] {
                return Err(Error::InvalidParameter(format!(
                    "{permutation:?} is not a permutation of 1..={k}"
                )));
            }
            seen[z] = true;
        }
        if center.branch() > k {
            return Err(Error::InvalidParameter(
                "center branch outside permutation".into(),
            ));
        }
        if !center.on_spine() && permutation[center.branch() - 1] != center.branch() {
            return Err(Error::InvalidParameter(format!(
                "permutation moves the center branch {}",
                center.branch()
            )));
        }
        Ok(Self {
            center,
            permutation,
            reflect_page,
        })
    }

    pub fn center(&self) -> &BookletPoint {
        &self.center
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn reflect_page(&self) -> bool {
        self.reflect_page
    }

    pub fn apply(&self, x: &BookletPoint) -> Result<BookletPoint> {
        map_booklet(&self.center, &self.permutation, self.reflect_page, x)
    }
}

fn map_booklet(
    center: &BookletPoint,
    permutation: &[usize],
    reflect_page: bool,
    x: &BookletPoint,
) -> Result<BookletPoint> {
    if x.branch() > permutation.len() {
        return Err(Error::InvalidPoint(format!(
            "branch {} out of range",
            x.branch()
        )));
    }
    if x.page().len() != center.page().len() {
        return Err(Error::DimensionMismatch {
            expected: center.page().len(),
            found: x.page().len(),
        });
    }
    let page = if reflect_page {
        center
            .page()
            .iter()
            .zip(x.page())
            .map(|(c, y)| 2.0 * c - y)
            .collect()
    } else {
        x.page().to_vec()
    };
    BookletPoint::new(permutation[x.branch() - 1], x.spine(), page)
}

/// A concrete element of the isotropy group of a center.
#[derive(Debug, Clone)]
pub enum IsotropyElement {
    Identity,
    CircleReflection(CirclePoint),
    GeodesicSymmetry(GeodesicSymmetry),
    BookletMap(BookletMap),
}

impl IsotropyElement {
    pub fn is_identity(&self) -> bool {
        matches!(self, IsotropyElement::Identity)
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            IsotropyElement::Identity => Ok(x.clone()),
            IsotropyElement::CircleReflection(c) => match x {
                Point::Circle(p) => Ok(Point::Circle(c.reflect(p))),
                _ => Err(Error::SpaceMismatch {
                    space: "S^1".into(),
                    reason: "circle reflection applied to a non-circle point".into(),
                }),
            },
            IsotropyElement::GeodesicSymmetry(s) => s.apply(x),
            IsotropyElement::BookletMap(m) => match x {
                Point::Booklet(b) => Ok(Point::Booklet(m.apply(b)?)),
                _ => Err(Error::SpaceMismatch {
                    space: "booklet".into(),
                    reason: "booklet map applied to a non-booklet point".into(),
                }),
            },
        }
    }
}

/// How isotropy elements are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Uniform over `{identity, geodesic symmetry}`.
    ReflectionCoin,
    /// Uniform branch permutation fixing the center branch, times a fair
    /// page-reflection coin. When the center lies on the spine every branch
    /// permutation fixes it and all `k!` are used.
    BookletScheme,
    /// Always the identity; the test then has no power by construction.
    IdentityOnly,
}

/// Random isotropy of a center point.
#[derive(Debug, Clone)]
pub struct RandomIsotropy {
    space: Space,
    center: Point,
    scheme: Scheme,
    symmetry: Option<GeodesicSymmetry>,
    /// Branches a booklet permutation is allowed to shuffle.
    movable: SmallVec<[usize; 8]>,
}

impl RandomIsotropy {
    pub fn new(space: Space, center: Point, scheme: Scheme) -> Result<Self> {
        space.check(&center)?;
        let mut symmetry = None;
        let mut movable = SmallVec::new();
        match (scheme, &space) {
            (Scheme::IdentityOnly, _) => {}
            (Scheme::ReflectionCoin, Space::Booklet { .. }) => {
                return Err(Error::Unsupported(
                    "reflection coin on a booklet; use the booklet scheme".into(),
                ))
            }
            (Scheme::ReflectionCoin, _) => symmetry = Some(GeodesicSymmetry::new(center.clone())?),
            (Scheme::BookletScheme, Space::Booklet { branches, .. }) => {
                let c = center.as_booklet().expect("checked");
                movable = (1..=*branches)
                    .filter(|&z| c.on_spine() || z != c.branch())
                    .collect();
            }
            (Scheme::BookletScheme, _) => {
                return Err(Error::Unsupported(format!("booklet scheme on {space}")))
            }
        }
        Ok(Self {
            space,
            center,
            scheme,
            symmetry,
            movable,
        })
    }

    /// The default scheme for a space: booklet maps on booklets, otherwise
    /// the reflection coin.
    pub fn standard(space: Space, center: Point) -> Result<Self> {
        let scheme = match space {
            Space::Booklet { .. } => Scheme::BookletScheme,
            _ => Scheme::ReflectionCoin,
        };
        Self::new(space, center, scheme)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn branches(&self) -> usize {
        match self.space {
            Space::Booklet { branches, .. } => branches,
            _ => 0,
        }
    }

    fn draw_permutation<R: Rng + ?Sized>(&self, rng: &mut R) -> SmallVec<[usize; 8]> {
        let mut shuffled = self.movable.clone();
        shuffled.shuffle(rng);
        let mut perm: SmallVec<[usize; 8]> = (1..=self.branches()).collect();
        for (&from, &to) in self.movable.iter().zip(&shuffled) {
            perm[from - 1] = to;
        }
        perm
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> IsotropyElement {
        match self.scheme {
            Scheme::IdentityOnly => IsotropyElement::Identity,
            Scheme::ReflectionCoin => {
                if !rng.random::<bool>() {
                    return IsotropyElement::Identity;
                }
                match &self.center {
                    Point::Circle(c) => IsotropyElement::CircleReflection(*c),
                    _ => IsotropyElement::GeodesicSymmetry(
                        self.symmetry.clone().expect("built with the scheme"),
                    ),
                }
            }
            Scheme::BookletScheme => {
                let perm = self.draw_permutation(rng);
                let reflect_page = rng.random::<bool>();
                IsotropyElement::BookletMap(BookletMap {
                    center: self.center.as_booklet().expect("checked").clone(),
                    permutation: perm.to_vec(),
                    reflect_page,
                })
            }
        }
    }

    /// Draw an element and apply it to `x`, without materializing the element.
    /// Consumes exactly the same random numbers as [`RandomIsotropy::draw`].
    pub fn randomize<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> Result<Point> {
        match self.scheme {
            Scheme::IdentityOnly => Ok(x.clone()),
            Scheme::ReflectionCoin => {
                if !rng.random::<bool>() {
                    return Ok(x.clone());
                }
                match (&self.center, x) {
                    (Point::Circle(c), Point::Circle(p)) => Ok(Point::Circle(c.reflect(p))),
                    _ => self
                        .symmetry
                        .as_ref()
                        .expect("built with the scheme")
                        .apply(x),
                }
            }
            Scheme::BookletScheme => {
                let perm = self.draw_permutation(rng);
                let reflect_page = rng.random::<bool>();
                let (Point::Booklet(c), Point::Booklet(b)) = (&self.center, x) else {
                    return Err(Error::SpaceMismatch {
                        space: self.space.to_string(),
                        reason: "booklet scheme applied to a non-booklet point".into(),
                    });
                };
                Ok(Point::Booklet(map_booklet(c, &perm, reflect_page, b)?))
            }
        }
    }

    /// For each probe, the number of distinct images (distance > 1e-9)
    /// across `draws` random elements. A count of 1 means the probe is fixed
    /// almost surely, which witnesses that the randomization is not admissible.
    pub fn probe_admissibility<R: Rng + ?Sized>(
        &self,
        probes: &[Point],
        draws: usize,
        rng: &mut R,
    ) -> Result<Vec<(Point, usize)>> {
        let mut out = Vec::with_capacity(probes.len());
        for probe in probes {
            self.space.check(probe)?;
            let mut images: Vec<Point> = Vec::new();
            for _ in 0..draws {
                let img = match self.draw(rng).apply(probe) {
                    Ok(p) => p,
                    Err(Error::SingularResult { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let mut seen = false;
                for known in &images {
                    if self.space.distance(known, &img)? <= DISTINCT_TOL {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    images.push(img);
                }
            }
            out.push((probe.clone(), images.len()));
        }
        Ok(out)
    }
}
