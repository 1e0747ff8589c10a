int f ( int n , int c ) {
  int x = 0 ;
  int y = 0 ;
  int z = 0 ;
  while ( x < n ) {
    x = x + 1 ;
    while ( y < n ) {
      y = y + 1 ;
      if ( c ) break ;
    }
    z = 3 ;
  }
  return z ;
}
