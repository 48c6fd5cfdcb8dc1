#include "ocl_oracle.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace carserver::testkit {

using metamodel::Camera;
using metamodel::Feature;
using metamodel::ModelInstance;

namespace {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

struct Failure {};
using Val = std::variant<Rat, bool>;

// Evaluation context: the instance, `self`, and an optional iterator binding.
struct Env {
  const ModelInstance* instance = nullptr;
  const Camera* camera = nullptr;  // self, or the iterator variable
  const Feature* feature = nullptr;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

// The oracle tree: text rendering plus a direct evaluation function.
struct Node {
  std::string text;
  std::function<Val(const Env&)> eval;  // throws Failure
};

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

Rat from_micros(std::int64_t micros) { return Rat(BigInt(micros), BigInt(Decimal::kScale)); }

Rat num(const Val& v) { return std::get<Rat>(v); }
bool truth(const Val& v) { return std::get<bool>(v); }

std::string paren(const std::string& s) { return "(" + s + ")"; }

class Builder {
 public:
  Builder(Rng& rng, std::string var) : rng_(rng), var_(std::move(var)) {}

  // Numeric expression over the camera bound to `prefix`.
  NodePtr numeric(int depth) {
    const auto choice = uniform(rng_, 0, depth <= 0 ? 2 : 7);
    switch (choice) {
      case 0: {
        const auto v = uniform(rng_, 0, 6);
        return leaf(std::to_string(v), Rat(BigInt(v)));
      }
      case 1: {
        const auto whole = uniform(rng_, 0, 3);
        const auto frac = uniform(rng_, 0, 99);
        const std::string text = std::to_string(whole) + "." + (frac < 10 ? "0" : "") +
                                 std::to_string(frac);
        return leaf(text, Rat(BigInt(whole * 100 + frac), BigInt(100)));
      }
      case 2: return attribute();
      case 3: {
        auto inner = numeric(depth - 1);
        return std::make_shared<Node>(Node{"-" + paren(inner->text), [inner](const Env& env) {
                                             return Val(-num(inner->eval(env)));
                                           }});
      }
      default: {
        static const char* ops[] = {"+", "-", "*", "/"};
        const std::string op = ops[uniform(rng_, 0, 3)];
        auto l = numeric(depth - 1);
        auto r = numeric(depth - 1);
        return std::make_shared<Node>(Node{
            paren(l->text) + " " + op + " " + paren(r->text), [l, r, op](const Env& env) {
              const Rat a = num(l->eval(env));
              const Rat b = num(r->eval(env));
              if (op == "+") return Val(a + b);
              if (op == "-") return Val(a - b);
              if (op == "*") return Val(a * b);
              if (b == Rat(0)) throw Failure{};
              return Val(a / b);
            }});
      }
    }
  }

  NodePtr boolean(int depth) {
    const auto choice = uniform(rng_, 0, depth <= 0 ? 2 : 7);
    switch (choice) {
      case 0: {
        const bool v = uniform(rng_, 0, 1) == 1;
        return std::make_shared<Node>(
            Node{v ? "true" : "false", [v](const Env&) { return Val(v); }});
      }
      case 1:
      case 2: {
        static const char* ops[] = {"<", "<=", ">", ">=", "=", "<>"};
        const std::string op = ops[uniform(rng_, 0, 5)];
        auto l = numeric(depth - 1);
        auto r = numeric(depth - 1);
        return std::make_shared<Node>(Node{
            paren(l->text) + " " + op + " " + paren(r->text), [l, r, op](const Env& env) {
              const Rat a = num(l->eval(env));
              const Rat b = num(r->eval(env));
              if (op == "<") return Val(a < b);
              if (op == "<=") return Val(a <= b);
              if (op == ">") return Val(a > b);
              if (op == ">=") return Val(a >= b);
              if (op == "=") return Val(a == b);
              return Val(a != b);
            }});
      }
      case 3: {
        auto inner = boolean(depth - 1);
        return std::make_shared<Node>(Node{"not " + paren(inner->text), [inner](const Env& env) {
                                             return Val(!truth(inner->eval(env)));
                                           }});
      }
      case 4: {
        auto l = boolean(depth - 1);
        auto r = boolean(depth - 1);
        const bool eq = uniform(rng_, 0, 1) == 1;
        return std::make_shared<Node>(Node{paren(l->text) + (eq ? " = " : " <> ") + paren(r->text),
                                           [l, r, eq](const Env& env) {
                                             const bool a = truth(l->eval(env));
                                             const bool b = truth(r->eval(env));
                                             return Val(eq ? a == b : a != b);
                                           }});
      }
      default: {
        static const char* ops[] = {"and", "or", "implies"};
        const std::string op = ops[uniform(rng_, 0, 2)];
        auto l = boolean(depth - 1);
        auto r = boolean(depth - 1);
        return std::make_shared<Node>(Node{
            paren(l->text) + " " + op + " " + paren(r->text), [l, r, op](const Env& env) {
              const bool a = truth(l->eval(env));
              if (op == "and" && !a) return Val(false);
              if (op == "or" && a) return Val(true);
              if (op == "implies" && !a) return Val(true);
              return Val(truth(r->eval(env)));
            }});
      }
    }
  }

 private:
  NodePtr leaf(const std::string& text, Rat value) {
    return std::make_shared<Node>(Node{text, [value](const Env&) { return Val(value); }});
  }

  NodePtr attribute() {
    // Bare names inside a context resolve to self; inside an iterator the
    // variable prefix is required.
    const std::string prefix = var_.empty() ? (uniform(rng_, 0, 1) ? "self." : "") : var_ + ".";
    switch (uniform(rng_, 0, 4)) {
      case 0:
        return std::make_shared<Node>(Node{prefix + "width", [](const Env& env) {
                                             return Val(Rat(BigInt(env.camera->width)));
                                           }});
      case 1:
        return std::make_shared<Node>(Node{prefix + "height", [](const Env& env) {
                                             return Val(Rat(BigInt(env.camera->height)));
                                           }});
      case 2:
        return std::make_shared<Node>(Node{prefix + "fov", [](const Env& env) {
                                             return Val(from_micros(env.camera->fov.raw()));
                                           }});
      case 3:
        return std::make_shared<Node>(Node{prefix + "cost", [](const Env& env) {
                                             return Val(from_micros(env.camera->cost.raw()));
                                           }});
      default:
        return std::make_shared<Node>(
            Node{prefix + "measurementsPerSecond", [](const Env& env) {
                   return Val(from_micros(env.camera->measurementsPerSecond.raw()));
                 }});
    }
  }

  Rng& rng_;
  std::string var_;
};

Outcome outcome_of(const std::function<bool()>& f) {
  try {
    return f() ? Outcome::True : Outcome::False;
  } catch (const Failure&) {
    return Outcome::Error;
  }
}

}  // namespace

ModelInstance oracle_instance(Rng& rng) {
  ModelInstance inst;
  const auto cameras = uniform(rng, 1, 5);
  for (std::int64_t i = 0; i < cameras; ++i) {
    Camera c;
    c.id = "camera" + std::to_string(i);
    c.width = uniform(rng, 0, 4);
    c.height = uniform(rng, 0, 4);
    c.fov = Decimal::from_raw(uniform(rng, 0, 8) * Decimal::kScale / 4);
    c.cost = Decimal::from_raw(uniform(rng, 0, 3) * Decimal::kScale / 2);
    c.measurementsPerSecond = Decimal::from_raw(uniform(rng, 0, 2'000'000));
    inst.add(c);
  }
  const auto features = uniform(rng, 1, 3);
  for (std::int64_t i = 0; i < features; ++i) {
    Feature f;
    f.id = "feature" + std::to_string(i);
    f.name = f.id;
    for (const auto& [id, _] : inst.cameras)
      if (uniform(rng, 0, 2) > 0) f.cameras.push_back(id);
    inst.add(f);
  }
  return inst;
}

OclCase random_ocl_case(Rng& rng, const ModelInstance& instance) {
  OclCase out;
  const int depth = static_cast<int>(uniform(rng, 1, 4));
  if (uniform(rng, 0, 2) > 0) {
    out.context = "Camera";
    Builder b(rng, "");
    auto body = b.boolean(depth);
    out.source = "context Camera\ninv Generated:\n" + body->text + "\n";
    for (const auto& [id, camera] : instance.cameras) {
      Env env{&instance, &camera, nullptr};
      out.expected[id] = outcome_of([&] { return truth(body->eval(env)); });
    }
    return out;
  }
  out.context = "Feature";
  Builder b(rng, "c");
  auto body = b.boolean(depth);
  const auto form = uniform(rng, 0, 3);
  const auto limit = uniform(rng, 0, 4);
  std::string expr;
  switch (form) {
    case 0: expr = "self.cameras->forAll(c | " + body->text + ")"; break;
    case 1: expr = "self.cameras->size() >= " + std::to_string(limit); break;
    case 2: expr = "self.cameras->isEmpty() or self.cameras->forAll(c | " + body->text + ")"; break;
    default: expr = "self.cameras->notEmpty() implies cameras->size() <> " + std::to_string(limit);
  }
  out.source = "context Feature\ninv Generated:\n" + expr + "\n";
  for (const auto& [id, feature] : instance.features) {
    auto all = [&]() {
      for (const auto& cid : feature.cameras) {
        Env env{&instance, &instance.cameras.at(cid), &feature};
        if (!truth(body->eval(env))) return false;
      }
      return true;
    };
    const auto n = static_cast<std::int64_t>(feature.cameras.size());
    out.expected[id] = outcome_of([&] {
      switch (form) {
        case 0: return all();
        case 1: return n >= limit;
        case 2: return n == 0 || all();
        default: return n == 0 || n != limit;
      }
    });
  }
  return out;
}

}  // namespace carserver::testkit
