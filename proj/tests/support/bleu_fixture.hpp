#pragma once

// Twenty hypothesis/reference pairs scored once by an external corpus BLEU
// scorer (whitespace tokens, no smoothing, '_' read as a space).

#include <array>
#include <utility>

namespace m2s::fixture {

inline constexpr double kBleuTwentyPairs = 68.89207073136599;

inline constexpr std::array<std::pair<const char*, const char*>, 20> kBleuPairs = {{
    {"where is the nearest gas station", "where is the nearest gas station"},
    {"valero is 4 miles away", "valero is 4 miles away at 200 alester ave"},
    {"the closest parking garage is dish parking", "the nearest parking garage is dish parking"},
    {"it will be sunny in boston on monday", "it will be cloudy in boston on monday"},
    {"your meeting is at 3pm", "your meeting is on tuesday at 3pm"},
    {"ok let me look into some options for you", "ok let me look into some options for you"},
    {"what do you think of this option : resto_rome_cheap_1", "what do you think of this option : resto_rome_cheap_2"},
    {"here it is resto_paris_expensive_1_address", "here it is resto_paris_expensive_1_phone"},
    {"is there anything i can help you with", "is there anything else i can help you with"},
    {"you are welcome", "you're welcome"},
    {"i am on it", "i'm on it"},
    {"any preference on a type of cuisine", "any preference on a type of cuisine"},
    {"how many people would be in your party", "which price range are looking for"},
    {"the weather in san francisco will be foggy tomorrow", "tomorrow it will be foggy in san francisco"},
    {"there is a traffic jam on the route to home", "there is heavy traffic on the route to home"},
    {"setting navigation now", "setting the navigation now"},
    {"your dentist appointment is on friday at 11am with tom", "your dentist appointment is friday at 11am with tom"},
    {"sure", "sure thing"},
    {"the coffee shop is 2 miles away", "the_coffee_shop is 2 miles away"},
    {"hello what can i help you with today", "hello what can i help you with today"},
}};

}  // namespace m2s::fixture
