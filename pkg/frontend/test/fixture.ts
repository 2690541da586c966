// 64x96 grayscale PNG used by the end-to-end test.
export const FIXTURE_WIDTH = 64;
export const FIXTURE_HEIGHT = 96;
export const FIXTURE_PNG_BASE64 =
  "iVBORw0KGgoAAAANSUhEUgAAAEAAAABgCAAAAACIris0AAAPvElEQVR42gXBSa9kW1YY4NXs9jQRce/NrHoGywNLCHlgQIIH" +
  "djUUyCDV1FP/f5AflZk3mtPsZu21+D78f4Pd4+vLdFGngnx46rGFQZtbqwbrcivPq2GZX0vLr4iVhqfmGhTHPhf+Kz4Z+i05" +
  "haMG6R5RseewzaCQ9GQ+yMWKrzoN/+A7EFp8arA5uILQ+W/QxgId/C9vHpJeGMR3BoGlEX5+LeGZTwqEqWp0zFPgsuw2nQZN" +
  "5oSB/yIhqPXDTYxA6aXUdFZvcyMVXMVpiDJjDZPDbgeSzF1BIz+u80E18V/b5Mbs5uBfEuRPH4XRuYMrcBgfrFip0wNH7Yz2" +
  "eNcvh6thpkT7e8U+yew4PrKOoNsI4vGnF4+E96+umDvpcUTx7O3iZ3kCyHz3z+vOdyZ/rh68iCv897vpanSEtEfEHnJgCFjH" +
  "vAMnfmPYJvRQooOLYZp8fVwumKsnMbP0nPnv0OXqh64QFyeemQEqQ5Rg4by8Uk+xzkcggiTutMcU3Rld5ZGcNfMH4brU+Vmn" +
  "rU/noBC1uv4WcrtRLPE1nZo++3NpIuNwZ3466z2OOjmGoTe+Af9toZEm371ZVc1aY8aCtO514grWzGUnVLN+APkE3GIFjD9s" +
  "jh1qOJR/LownjimwjzUSLCN3m4ZdPDoJsCCprC66ZsyvNjfU2fpYu94n2OmZaMjhyFI4eaILZeffa7qErI2wxakiQeEDYnmn" +
  "ptPCxMtxAMqcL/xaxnWmeguIcRLSwt6xjD5rmO3KSw+w/4Q+YLDnn/r/L93WTQFPt0g6YfNtunjtNMHiQA5n7ApNY6EBc++c" +
  "fl1/jVMvrtOFUrjOLon/FpUSDkj1uuU2+U+KzH8N1aEGcrHHSZbZRZxCd+G8nbhmBDSLxZULbjbeRWaQUDvkNj/KorYM/jl0" +
  "DBj2LwdmpyTNexwTzl3JIITTiHYJJL4u0wb5LOvnu++90oKv4Gvl/5HZUjiuIWH3X+LxX1sazvMRBaka4yBjJa6vN6PJV4+a" +
  "oSdB5xpdTpz4t0k4OCqjhoSxvh1hborJ3ITjxqgsibk7mc/qt91Fw8K13jimg483Bf5ZTkc6T5YmuOjMKPmWQ5hekXx/Gauh" +
  "sjM73m6Wu6FxhdtyVjgV+AwP/sPFXYsLO0/npGE+b24ehkbssdoEnfIpNIjRfrhywSNQro3PCF68yOT4Z+EdJcrXds3mzqVH" +
  "k6CoaDkOc0OEwTtfeR6cnpQLwyzh+qQBidbnB/8lZeQRo4aRmPi9zIFzczQf0pg1mkbTAfbqBkH7I0Mlfskcj4j9nHf+TeQW" +
  "JcsFI3pN3jmL6G4ayGu3uk+74JcfPMIM7qBphHo54cJ2JopRS+TfVZ0peW4QFp1uOjENd90qiEUbCbitpeeyVK/RDQ/5sHDY" +
  "U3lW+7crR/6bt/DKvuMSYCIAqT7vz3nVwFnaQJGl0lSYo7ntGBbGm5Mphrj3PgU8hf9wz+QnVQ1AENWF+ZwSwwFw4si+zq31" +
  "k49QQN/qmhpW9b0E1z6gdlmMWm5DztEA/bE+E9EnWICGdaLhMSr0MF3cl5Jt2yfiG0RmWewRvh0QLxb4dx5ZqPmLL87ejdkD" +
  "J1mynn0txuKo93n3JEkn3YdzMhadhya0BRuf/HMG4DatLazNm2M44P0I7uHEN49NvCgHphQ6hSMNq339puLQkupRJ+Xfybkc" +
  "LmfqShzKaspsW7M6uWFOUqErc8NPQak+YfNj2NtruLYMjZFP/r1kWzE+I6rjZiXmkToqawQ0qj/e/IZnmfqHqHPYgznLY/G9" +
  "tgEQKPP/isMVbo51MgpjNfOxzOdMSBF2/RBtSMP7u786dG1FVzUARvArJSCjYBwuAQxc2Zf7Bd2DPstzqbbVbyI3AUjB/aqm" +
  "4HvTnXer8+hQm8d7a3oa/89bP+mBMzAmLlG744nZ60efBNjIWc5aV3XZctP+Vmx2Yg0V4ghcT/79q0zGoftH6j2d7LDh9+wf" +
  "umdZIp3BpA03ksERR9AQdxI66KqrmFh0/I95oLlZ/OXhk7mB6uyiCJkDVl1f7BPRoOk+zJj1WeJzbhqEiE6ucfD/Nn8sONL5" +
  "vA4jDiCzNnTjWE+U0Xge3suWAFZ28B1v876A4WBlIOvsCIRvEcaGQM6X2hX/o2rrgT+B13ePHKDXn6jOI2L98/cy5hd4m9i+" +
  "kcaUBv9sLj/JSbzWZmzojjmEgQxvoIcCEz/ntzNzD8NR73lnoB6A26Ubur6Qu/Yf6BLiZ1gpsI7Aobqgeu/hUoPLcZkV8gLn" +
  "BAmZ+AWWafhVQmsmSli8XymohuOHwhFxsd0sprBEJPR8Qjg97s/lvUG5xA3eOtUWofOnnwe++PeW4LTt62YhYp+negaZjvMr" +
  "eEBaMfUQQ+Op2YDQi4fc4nUMwFYTGkEkN4Q8XT636VEO114cC5aUH8+TP4i9xnmM64CP5Bo4DEmaO58uPK+TuInzi387Bgzs" +
  "lyzJgk/h6YITu2mEUBhmiw645u5P5weeR6gtl8ltb49kJNAcjRCZe/q3YRJ0r/taRTontS1o4H22wi7y+zZTDfoeAziVfl6O" +
  "XINadcL/mKSHMwU8sF/WB/IAP2eldntenx/Xw4fqgoxwCHU6yckypjMCFBNCXoD/UI7ZgS7X54cv1RHN1AsNCPjTt/9Sncox" +
  "ta6HEGz+0ugby1rjUYkV3qltF/7t8J5Os5pxSB4LwqpLDjY5jSodwwyDcqMR1tcvU2lz+BP3MZKafnd6edI9x6fJJaJt42re" +
  "Wbnn2OulQ3HGszvqD4fbAkmO+N88LHSn84idX/2DKnxe+I8k1qdXlhqXLtKHe28jKmmM7qBTORGO9EL4EUU3PEosQsHBFQpn" +
  "DEzQdQk+Fj/xULf0ZbSF69qJhddbTnAsHirqL97pD4lX6zyZDPcpljslpbPFbfRUtLk6DOdxK9s8RpzvjOcBBH7bCjn7M2xp" +
  "PsrxRm1klm9sbYOk6DKNtw371+o1tPmFLRl+W++TD/jA4cWNnmq38ZxkiBf/I0f/sITOKuSHAnFzND0WEU7mjjDNdNHr5BaZ" +
  "0hTTDiQoK1da8LknFj9FX3DpsWucTpg9+Vy/lfe2j3AXTCLrAGg97YG/b1rX/vKzH68EJ5Qsl1b5Psp84qPluYVbL7Rl60R8" +
  "cefsH20ma8Cuugm2BYIaskfq63Cqt7vbrtZmiN/SAXxUpA0j+e+3L7MV371MP0F3Ou1MzmuZxopo/hzlMc466FSt+r2PWtqX" +
  "53W6juiHs4n0Jmpea0x+nOpPcTfvZHzQc/UcSl0Eou+9gT/ew3tUdf5t8zbaaMkdFyW/tUr6lmI70E9t7SjRJrrr+94/hwPA" +
  "tuOcpcMN3L+vKbRpJxhCzbXmSyTkdG2G+4KXkfaJ43B98vPxQXUsNbjL6eb84psb4/laT22l0DUq6bVEHGQ0wibNN//KdTrX" +
  "g3KEsHeCLl+iZol9yDiyv5c6luGPPnJmgZBbgM+Wy0bUcp8Oq2nzBwSPshtFfl5PcX0Kee+esUIh1PEM7UtHKiatn9Cv5ELy" +
  "ZBdEn10Gf3HU3ewu+YjG3k2YfJb1mUh9DFHA89A7wDbvFlPG4z5FAkdLY/7lwMPGA32gimfPzdA6aDk+I9+oB+x4X1b2dr5J" +
  "mPvqueXZXezorvBvRo98QaqXJGTMySawZWiajo/lxXVAPKTgtb5QZb2L927rAyLUc7EBRKFeJR4t0FZ5CbDugYZWnKe2ftu+" +
  "UOzX5t+nJjGxRwnoqo7UwvkfboYhwfM/RUeJYkkUYfiuIYCPPkTBHHS09nEqb5TLPuCxdlfUlQC9j2kubCqBeOzpB53g5EW5" +
  "Bk6JWKDnKyDa6ifhApfxg69tI/JkwVCH5bfziOOcbi/+ZzZkyh0zzUNiCVXe3pA6LnbkAh6csBPSfoE+vimVhIw2n0ItCDfH" +
  "f6zC66fdkEPBjshX8KdvzAwLY4TqyHYLHYodK8nAJg82RA2pBYVBlt5Te5ueWbvzX+afHI22fMIaP8ODAOublD3QHva5LaPR" +
  "asqXeWacj/bmkQJdy8HNDO8lnP7hTg/mvt/e67mcXGULDw5LaZGW46oD+JxdV/WPIj69/h3wRs/r9HnD3pd85qcrYyj5t9N8" +
  "ZQTOPmSb2fu28bjr7jkwcQvfJEAf+D7zi//4JD96fG8QNHnfnAGP2O3qQANzb/17eIzIT6r5UG5QB+PUWaJry70DYYRcHQpj" +
  "5gPH5LeWoCW4n13vvww9+VIyFVBzEKH1Ld6W89WKiacjrIN/451e7WiLN2wBBn8wFpwlHCV8haP2afz4KPEBMh5pDFalKlGz" +
  "ZwVkZP6HtfhBoVnvwGCzfEYyoseNPMAGkl1pXsponpI4EY7xGOftsDbMZDT6yTLuG0gYau/kj8GhOH9ctkZ20Jl0aD8Zn15s" +
  "H71GeT4Sv3kXp8gyovK/uOKTZ+nR0rEl7xax1rgxODWkLR2WXtVmTTtRQxv+BGmgqkwz9Ewh0hj9iNaYx5dTauE0keYezkff" +
  "k7hDxjQ31T3radYdeAPtU8NzO09GOmrM5EVivG3Tuaaa2qGeD/kkHPo4+vWprRKInNL3DmrkVvEFvP/VCC3x/8WxuWF+budQ" +
  "16tSbhsNVO0zdPn1dzeN0/w3jAcgRK4qIjx2xw9kqZl/PxtkyyrPVUlTpBFHNB6Sc68On7LjS204Cd3M5KXgsaZstb9hdw4I" +
  "a5+rEw1fxzWMMYwHMnxKoUdtrye62F4ofYyKndqCb+7giE2XW6WxI9EUrZA3cs1/9vDIaBuftCA/08xuJqnTBeRVWm37gPvt" +
  "qZOBWmHxGi0b/2vtTFI9eEPj24vGEaEPQqzjaPxiPXfwzWP17jWDBCFtmrDRyQDJEUCc2jSfuWmPgGI2/eDFyG8eGEcqUlRe" +
  "WNuyqdvh9XKdo3zyjCvvl23wH7wLWsdlT8e1Lnt+emn+OUvF8YTYlc8FHEBxj0A8zvduvLvgu03N81ietHjaeuQe+tvAjfrk" +
  "8DK+jtMWNh62vdzzqOod3IJa+FVdtzxb9nftjGlApBWA12o3me4/WMLxEse2N+a7Tr0Gj2Lc0tHc6G1yd5W3s7Z2/vd5e5S6" +
  "SiaJzT9TUKp+xlSm6Qgailm49l3Wp2dsdw95xtr5rlpt9+ReuI/r5LckJ1VMeiNrXSiOSBNNR78zxs+NCH64Lrv/NYw/ndQF" +
  "+XlDXscICRq/gNfvbVBEltHp9KlX94sNU3DX7RxRNLiGLjo39IxJIrDZntk/nHHqh7rnZEvmfy3giyMSHCG4ykDeiguuBZZu" +
  "ylVTuEd+okYcREcl12OlN/GYybjRQoe7FHoFWcMWORphcXHYTmPQxZ582b9h83MbTRUrumirxnQMq22zMPH/8eHw8xZZjeOo" +
  "MEQjQm+LKOF5sa6L67etLzgVX/Jwx5/X00uQ1S61d/xPEouv1eA0xqEAAAAASUVORK5CYII=";
