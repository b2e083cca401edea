#include "difflang/numdiff.hpp"

namespace difflang {

namespace {

double* slot_ref(std::vector<Value>& args, const ArgSlot& slot) {
  if (slot.arg >= args.size())
    throw DlError(DiagKind::ArityMismatch,
                  "perturbation slot refers to argument " +
                      std::to_string(slot.arg) + " of " +
                      std::to_string(args.size()));
  Value& v = args[slot.arg];
  if (slot.index < 0) {
    double* d = std::get_if<double>(&v.v);
    if (!d)
      throw DlError(DiagKind::TypeMismatch,
                    "perturbation slot is not a double argument");
    return d;
  }
  const ArrayRef& arr = v.as_array();
  if (std::size_t(slot.index) >= arr->size())
    throw DlError(DiagKind::IndexOutOfBounds,
                  "perturbation index " + std::to_string(slot.index) +
                      " out of bounds for array of length " +
                      std::to_string(arr->size()));
  return &(*arr)[std::size_t(slot.index)];
}

std::vector<Value> copy_args(const std::vector<Value>& args) {
  // Values hold arrays by reference, so a plain copy still aliases the same
  // storage; that is exactly what we want (the perturbed element is visible).
  return args;
}

}  // namespace

double fd_partial(Interpreter& interp, const std::string& fname,
                  std::vector<Value>& args, const ArgSlot& slot,
                  const NdOptions& opts) {
  double* x = slot_ref(args, slot);
  const double saved = *x;

  *x = saved + opts.eps;
  double hi = interp.call(fname, copy_args(args)).as_double();
  *x = saved - opts.eps;
  double lo = interp.call(fname, copy_args(args)).as_double();
  *x = saved;

  return (hi - lo) / (2.0 * opts.eps);
}

std::vector<double> fd_gradient(Interpreter& interp, const std::string& fname,
                                std::vector<Value>& args,
                                const std::vector<ArgSlot>& slots,
                                const NdOptions& opts) {
  std::vector<double> out;
  out.reserve(slots.size());
  for (const ArgSlot& s : slots)
    out.push_back(fd_partial(interp, fname, args, s, opts));
  return out;
}

}  // namespace difflang
