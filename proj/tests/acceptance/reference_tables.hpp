#pragma once

// Published instance data, transcribed separately from the library tables so
// the two can be compared field by field.

#include <array>
#include <string_view>
#include <vector>

namespace reference {

struct District {
    int demand;
    int uav_cost;
    int truck_cost;
};

// districts-1 .. districts-6
inline const std::vector<std::vector<District>> kDistricts = {
    {{200, 150, 900}},
    {{300, 100, 600}, {100, 200, 1200}},
    {{200, 50, 300}, {300, 150, 900}, {100, 250, 1500}},
    {{200, 50, 300}, {300, 150, 900}, {100, 200, 1200}, {150, 300, 1800}},
    {{200, 50, 300}, {300, 100, 600}, {100, 150, 900}, {150, 200, 1200}, {250, 250, 1500}},
    {{200, 50, 300}, {300, 100, 600}, {100, 150, 900}, {150, 200, 1200}, {250, 250, 1500}, {200, 300, 1800}},
};

// periods 1..30: decreasing demand for districts 1-3, then increasing demand
inline constexpr std::array<std::array<int, 6>, 30> kPatterns = {{
    {300, 450, 150, 100, 150, 50},
    {298, 447, 149, 102, 153, 51},
    {296, 444, 148, 104, 156, 52},
    {293, 440, 147, 107, 161, 54},
    {290, 435, 145, 110, 165, 55},
    {285, 428, 143, 115, 173, 58},
    {280, 420, 140, 120, 180, 60},
    {273, 410, 137, 127, 191, 64},
    {266, 399, 133, 134, 201, 67},
    {258, 387, 129, 142, 213, 71},
    {249, 374, 125, 151, 227, 76},
    {239, 359, 120, 161, 242, 81},
    {228, 342, 114, 172, 258, 86},
    {217, 326, 109, 183, 275, 92},
    {206, 309, 103, 194, 291, 97},
    {194, 291, 97, 206, 309, 103},
    {183, 275, 92, 217, 326, 109},
    {172, 258, 86, 228, 342, 114},
    {161, 242, 81, 239, 359, 120},
    {151, 227, 76, 249, 374, 125},
    {142, 213, 71, 258, 387, 129},
    {134, 201, 67, 266, 399, 133},
    {127, 191, 64, 273, 410, 137},
    {120, 180, 60, 280, 420, 140},
    {115, 173, 58, 285, 428, 143},
    {110, 165, 55, 290, 435, 145},
    {107, 161, 54, 293, 440, 147},
    {104, 156, 52, 296, 444, 148},
    {102, 153, 51, 298, 447, 149},
    {100, 150, 50, 300, 450, 150},
}};

struct NepalDistrict {
    std::string_view name;
    int demand;
    int uav_cost;
    int truck_cost;
};

inline constexpr std::array<NepalDistrict, 13> kNepal = {{
    {"Dolakha", 217, 202, 1256},
    {"Gorkha", 305, 178, 1266},
    {"Okhaldhunga", 55, 266, 1223},
    {"Sindhupalchok", 278, 108, 667},
    {"Bhaktapur", 117, 26, 169},
    {"Rasuwa", 49, 108, 1928},
    {"Ramechhap", 167, 214, 871},
    {"Makwanpur", 156, 197, 1085},
    {"Dhading", 352, 113, 731},
    {"Sindhuli", 156, 82, 683},
    {"Nuwakot", 333, 67, 437},
    {"Kavrepalanchok", 308, 62, 365},
    {"Lalitpur", 107, 12, 251},
}};

}  // namespace reference
