#pragma once

#include "hodge/decompose.hpp"

#include <cstdint>
#include <string>

namespace hodge {

/// Malformed input file; `offset` is the byte position of the problem.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::uint64_t offset, const std::string& what);
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

///
/// Binary grid files share one ASCII header line
///
///   <TAG> v1 dim=<m> n=<n1,..,nm> l=<spacing> origin=<o1,..,om> order=row-major [extra keys]
///
/// followed by little-endian IEEE doubles in vertex order (last axis fastest).
///
///   LSGRID: one level-set value per vertex.
///   VFGRID: extra key comps=<m>; m interleaved components per vertex.
///   FORM1:  extra keys degree=1 support=<normal|tangential> count=<N>; N records of
///           (int64 global edge id, double value).
///

void write_levelset(const std::string& path, const CartesianComplex& complex, const Vector& primal);

struct LevelSetFile {
    CartesianComplex complex;
    Vector primal;
};
LevelSetFile read_levelset(const std::string& path);

void write_vector_field(const std::string& path, const CartesianComplex& complex, const Matrix& values);

struct VectorFieldFile {
    CartesianComplex complex;
    Matrix values; // vertices x m
};
VectorFieldFile read_vector_field(const std::string& path);

void write_form(const std::string& path, const CartesianComplex& complex, const SupportSet& support,
                const Vector& values);

struct FormFile {
    CartesianComplex complex;
    SupportKind kind = SupportKind::tangential;
    std::vector<Index> cells; // global edge ids
    Vector values;
};
FormFile read_form(const std::string& path);

/// Whitney reconstruction of a 1-form at every grid vertex (vertices x m).
Matrix resample_form(const CartesianComplex& complex, const SupportSet& support, const DiscreteForm& form);

} // namespace hodge
