#include "binpipe/primitives.hpp"

#include <stdexcept>
#include <utility>

namespace binpipe {

namespace {

constexpr std::array<std::string_view, kPrimitiveTypeCount> kTypeNames = {
    "mesh_triangle", "triangle", "fragment", "patch", "micropolygon", "token"};

template <std::size_t I = 0>
PrimitiveList make_list_at(std::size_t index) {
  if constexpr (I < kPrimitiveTypeCount) {
    if (index == I) return PrimitiveList{std::in_place_index<I>};
    return make_list_at<I + 1>(index);
  } else {
    throw std::invalid_argument("bad primitive type");
  }
}

}  // namespace

std::string_view to_string(PrimitiveType t) { return kTypeNames.at(static_cast<std::size_t>(t)); }

std::optional<PrimitiveType> parse_primitive_type(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == s) return static_cast<PrimitiveType>(i);
  return std::nullopt;
}

PrimitiveList make_list(PrimitiveType t) { return make_list_at(static_cast<std::size_t>(t)); }

std::size_t size(const PrimitiveList& l) {
  return std::visit([](const auto& v) { return v.size(); }, l);
}

void clear(PrimitiveList& l) {
  std::visit([](auto& v) { v.clear(); }, l);
}

void push(PrimitiveList& l, Primitive&& p) {
  if (l.index() != p.index())
    throw std::invalid_argument("primitive type " + std::string(to_string(type_of(p))) +
                                " pushed into " + std::string(to_string(type_of(l))) + " list");
  std::visit(
      [&p](auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        vec.push_back(std::get<T>(std::move(p)));
      },
      l);
}

void append(PrimitiveList& dst, PrimitiveList&& src) {
  if (dst.index() != src.index()) throw std::invalid_argument("primitive list type mismatch");
  std::visit(
      [&src](auto& vec) {
        using V = std::decay_t<decltype(vec)>;
        auto& other = std::get<V>(src);
        if (vec.empty()) {
          vec = std::move(other);
        } else {
          vec.insert(vec.end(), std::make_move_iterator(other.begin()), std::make_move_iterator(other.end()));
        }
        other.clear();
      },
      dst);
}

Primitive element(const PrimitiveList& l, std::size_t i) {
  return std::visit([i](const auto& vec) { return Primitive{vec.at(i)}; }, l);
}

}  // namespace binpipe
