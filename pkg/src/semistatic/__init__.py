"""Super-hedging of American options with semi-static strategies on finite trees."""
